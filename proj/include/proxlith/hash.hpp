#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace proxlith {

/// FNV-1a 64-bit content hash, printed as 16 hex digits. Used to stamp
/// result files with the exact configuration that produced them.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string content_hash(std::string_view s) {
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = fnv1a64(s);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace proxlith
