#include "dmchain/ledger/chain.hpp"

#include <chrono>
#include <fstream>
#include <iterator>

#include "dmchain/error.hpp"

namespace dmchain::ledger {

Clock system_clock() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

std::string genesis_header(const std::string& channel) {
    return "digest=" + std::string(kDigestName) + ";channel=" + channel;
}

VerifyResult verify_blocks(std::span<const Block> blocks, const std::optional<Hash>& expected_head) {
    auto bad = [](std::size_t i, std::string why) { return VerifyResult{false, i, std::move(why)}; };
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        if (b.index != i)
            return bad(i, "block index out of sequence");
        if (i == 0) {
            if (b.prev_hash != Hash{})
                return bad(0, "genesis prev_hash is not zero");
            if (b.header.rfind("digest=" + std::string(kDigestName) + ";", 0) != 0)
                return bad(0, "genesis header does not pin the digest");
        } else if (b.prev_hash != blocks[i - 1].block_hash) {
            return bad(i, "prev_hash does not match the previous block");
        }
        for (const auto& t : b.txs)
            if (t.compute_id() != t.tx_id)
                return bad(i, "transaction id mismatch for " + to_hex(t.tx_id));
        if (b.compute_hash() != b.block_hash)
            return bad(i, "block hash mismatch");
    }
    if (expected_head) {
        if (blocks.empty() || blocks.back().block_hash != *expected_head)
            return bad(blocks.size(), "chain head does not match the recorded head");
    }
    return {};
}

Chain::Chain(std::string channel, std::size_t sealing_batch, Clock clock)
    : channel_(std::move(channel)), batch_(sealing_batch ? sealing_batch : 1), clock_(std::move(clock)) {
    if (!clock_)
        clock_ = system_clock();
    Block g;
    g.index = 0;
    g.timestamp_ms = clock_();
    g.header = genesis_header(channel_);
    g.block_hash = g.compute_hash();
    blocks_.push_back(std::move(g));
}

Chain Chain::open(const std::filesystem::path& file, std::string channel, std::size_t sealing_batch, Clock clock) {
    Chain c(channel, sealing_batch, std::move(clock));
    if (std::filesystem::exists(file)) {
        auto blocks = load_block_file(file);
        const auto v = verify_blocks(blocks, load_head_file(file));
        if (!v.ok)
            throw StateError("ledger file " + file.string() + " fails verification at block " +
                             std::to_string(*v.first_bad) + ": " + v.reason);
        if (blocks.front().header != genesis_header(channel))
            throw StateError("ledger file " + file.string() + " belongs to another channel");
        c.blocks_ = std::move(blocks);
        c.file_ = file;
    } else {
        if (file.has_parent_path())
            std::filesystem::create_directories(file.parent_path());
        c.file_ = file;
        c.persist(c.blocks_.front());
    }
    return c;
}

void Chain::append(Transaction tx) {
    pending_.push_back(std::move(tx));
    if (pending_.size() >= batch_)
        seal();
}

std::optional<std::size_t> Chain::seal() {
    if (pending_.empty())
        return std::nullopt;
    Block b;
    b.index = blocks_.size();
    b.prev_hash = blocks_.back().block_hash;
    b.txs = std::move(pending_);
    pending_.clear();
    b.timestamp_ms = clock_();
    b.block_hash = b.compute_hash();
    persist(b);
    blocks_.push_back(std::move(b));
    return blocks_.size() - 1;
}

void Chain::persist(const Block& b) {
    if (!file_)
        return;
    const std::string bytes = encode_block(b);
    {
        std::ofstream out(*file_, std::ios::binary | std::ios::app);
        ByteWriter len;
        len.u64(bytes.size());
        out << len.str() << bytes;
        if (!out)
            throw StateError("cannot append to ledger file " + file_->string());
    }
    std::ofstream head(file_->string() + ".head", std::ios::trunc);
    head << to_hex(b.block_hash) << '\n';
}

std::vector<Block> load_block_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw LoadError("cannot open ledger file " + file.string());
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<Block> out;
    std::size_t pos = 0;
    while (pos < data.size()) {
        if (data.size() - pos < 8)
            throw LoadError("truncated record in ledger file " + file.string());
        ByteReader r(std::string_view(data).substr(pos, 8));
        const auto n = r.u64();
        pos += 8;
        if (data.size() - pos < n)
            throw LoadError("truncated record in ledger file " + file.string());
        out.push_back(decode_block(std::string_view(data).substr(pos, n)));
        pos += n;
    }
    if (out.empty())
        throw LoadError("ledger file " + file.string() + " has no blocks");
    return out;
}

std::optional<Hash> load_head_file(const std::filesystem::path& file) {
    std::ifstream in(file.string() + ".head");
    std::string hex;
    if (!(in >> hex))
        return std::nullopt;
    return parse_hash(hex);
}

} // namespace dmchain::ledger
