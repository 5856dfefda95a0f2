#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dmchain {

using Hash = std::array<std::uint8_t, 32>;

inline constexpr std::string_view kDigestName = "SHA-256";

Hash sha256(std::string_view bytes);
/// Digest of the concatenation a || b.
Hash sha256(std::string_view a, std::string_view b);

/// Lowercase hex, 64 characters.
std::string to_hex(const Hash& h);
/// nullopt unless exactly 64 hex digits.
std::optional<Hash> parse_hash(std::string_view hex);

inline std::string_view as_bytes(const Hash& h) noexcept {
    return {reinterpret_cast<const char*>(h.data()), h.size()};
}

} // namespace dmchain
