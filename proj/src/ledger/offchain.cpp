#include "dmchain/ledger/offchain.hpp"

#include <fstream>
#include <iterator>
#include <mutex>

#include "dmchain/error.hpp"

namespace dmchain::ledger {

void OffChainStore::attach(std::filesystem::path dir) {
    std::unique_lock lock(mu_);
    dir_ = std::move(dir);
    std::filesystem::create_directories(*dir_);
    for (const auto& e : std::filesystem::directory_iterator(*dir_)) {
        if (!e.is_regular_file())
            continue;
        const auto h = parse_hash(e.path().filename().string());
        if (!h)
            continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (sha256(data) != *h)
            throw LoadError("off-chain blob " + e.path().string() + " does not match its name");
        blobs_.emplace(*h, std::move(data));
    }
}

Hash OffChainStore::put(std::string_view payload) {
    if (payload.empty())
        throw DomainError("off-chain payload must not be empty");
    const Hash h = sha256(payload);
    std::unique_lock lock(mu_);
    const auto [it, inserted] = blobs_.emplace(h, std::string(payload));
    if (inserted && dir_) {
        const auto path = *dir_ / to_hex(h);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (!out)
            throw StateError("cannot write off-chain blob " + path.string());
    }
    return h;
}

std::string OffChainStore::get(const Hash& h) const {
    std::shared_lock lock(mu_);
    const auto it = blobs_.find(h);
    if (it == blobs_.end())
        throw NotFoundError("no off-chain content for " + to_hex(h));
    return it->second;
}

bool OffChainStore::contains(const Hash& h) const {
    std::shared_lock lock(mu_);
    return blobs_.count(h) != 0;
}

std::size_t OffChainStore::size() const {
    std::shared_lock lock(mu_);
    return blobs_.size();
}

} // namespace dmchain::ledger
