#include "dmchain/digest.hpp"

#include <openssl/evp.h>

#include <memory>

#include "dmchain/error.hpp"

namespace dmchain {

namespace {

Hash digest_parts(std::initializer_list<std::string_view> parts) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 initialisation failed");
    for (auto p : parts)
        if (EVP_DigestUpdate(ctx.get(), p.data(), p.size()) != 1)
            throw Error("SHA-256 update failed");
    Hash h{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), h.data(), &len) != 1 || len != h.size())
        throw Error("SHA-256 finalisation failed");
    return h;
}

} // namespace

Hash sha256(std::string_view bytes) { return digest_parts({bytes}); }
Hash sha256(std::string_view a, std::string_view b) { return digest_parts({a, b}); }

std::string to_hex(const Hash& h) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(64, '0');
    for (std::size_t i = 0; i < h.size(); ++i) {
        s[2 * i] = digits[h[i] >> 4];
        s[2 * i + 1] = digits[h[i] & 0xf];
    }
    return s;
}

std::optional<Hash> parse_hash(std::string_view hex) {
    if (hex.size() != 64)
        return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9')
            return c - '0';
        if (c >= 'a' && c <= 'f')
            return c - 'a' + 10;
        if (c >= 'A' && c <= 'F')
            return c - 'A' + 10;
        return -1;
    };
    Hash h{};
    for (std::size_t i = 0; i < 32; ++i) {
        const int hi = nibble(hex[2 * i]);
        const int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            return std::nullopt;
        h[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return h;
}

} // namespace dmchain
