#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmchain/ledger/types.hpp"

namespace dmchain::ledger {

/// Milliseconds since the epoch; injectable for deterministic tests.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

struct VerifyResult {
    bool ok = true;
    std::optional<std::size_t> first_bad; ///< index of the first inconsistent block
    std::string reason;
};

/// Recomputes every tx id and block hash and checks the links. The genesis
/// block must have an all-zero prev_hash and pin the digest in its header.
/// When `expected_head` is given, a chain whose last hash differs (e.g. a
/// truncated tail) fails at index blocks.size().
VerifyResult verify_blocks(std::span<const Block> blocks, const std::optional<Hash>& expected_head = std::nullopt);

std::string genesis_header(const std::string& channel);

/// One channel's hash-linked block list with a pending set that is sealed
/// every `sealing_batch` transactions. Not internally synchronized; Network
/// serializes access.
class Chain {
public:
    Chain(std::string channel, std::size_t sealing_batch, Clock clock);

    /// Loads `file` when it exists (throws StateError if it fails
    /// verification against its head file), otherwise starts a new chain.
    /// Sealed blocks are appended to the file from then on.
    static Chain open(const std::filesystem::path& file, std::string channel, std::size_t sealing_batch, Clock clock);

    /// Queues a finished transaction; seals when the batch is full.
    void append(Transaction tx);
    /// Seals the pending set into a block; nullopt when nothing is pending.
    std::optional<std::size_t> seal();

    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    const std::vector<Transaction>& pending() const noexcept { return pending_; }
    const std::string& channel() const noexcept { return channel_; }
    const Hash& head() const noexcept { return blocks_.back().block_hash; }
    VerifyResult verify() const { return verify_blocks(blocks_, head()); }

private:
    void persist(const Block& b);

    std::string channel_;
    std::size_t batch_;
    Clock clock_;
    std::vector<Block> blocks_;
    std::vector<Transaction> pending_;
    std::optional<std::filesystem::path> file_;
};

/// Blocks stored in an append-only file (u64 length + encode_block bytes).
/// Throws LoadError on malformed records.
std::vector<Block> load_block_file(const std::filesystem::path& file);
/// The head hash recorded next to a block file ("<file>.head"), if present.
std::optional<Hash> load_head_file(const std::filesystem::path& file);

} // namespace dmchain::ledger
