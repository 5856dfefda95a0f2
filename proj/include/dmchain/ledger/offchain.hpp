#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "dmchain/digest.hpp"

namespace dmchain::ledger {

/// Content-addressed blob store keyed by SHA-256. With a directory attached,
/// every blob is also written to <dir>/<hex> and existing blobs are loaded.
/// Safe for concurrent readers and writers.
class OffChainStore {
public:
    OffChainStore() = default;
    explicit OffChainStore(std::filesystem::path dir) { attach(std::move(dir)); }

    /// Starts persisting to `dir` and loads the blobs already there. Throws
    /// LoadError if a blob does not match its file name.
    void attach(std::filesystem::path dir);

    /// Throws DomainError on an empty payload.
    Hash put(std::string_view payload);
    /// Throws NotFoundError for an unknown hash.
    std::string get(const Hash& h) const;
    bool contains(const Hash& h) const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mu_;
    std::map<Hash, std::string> blobs_;
    std::optional<std::filesystem::path> dir_;
};

} // namespace dmchain::ledger
