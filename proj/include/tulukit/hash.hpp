#pragma once

// FNV-1a 64-bit, used for content hashes (prompts, requests, reports).
// Stable across platforms; not cryptographic.

#include <cstdint>
#include <string>
#include <string_view>

namespace tulu {

inline constexpr uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr uint64_t kFnvPrime = 1099511628211ULL;

inline uint64_t fnv1a(std::string_view data, uint64_t h = kFnvOffset) {
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

inline std::string content_hash(std::string_view data) { return to_hex(fnv1a(data)); }

}  // namespace tulu
