#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovpp {

using Bytes = std::vector<uint8_t>;
using Digest = std::array<uint8_t, 32>;

inline void append_bytes(Bytes& out, std::span<const uint8_t> src) {
    out.insert(out.end(), src.begin(), src.end());
}

inline void append_u32_be(Bytes& out, uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void append_u64_be(Bytes& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void append_i64_be(Bytes& out, int64_t v) {
    append_u64_be(out, static_cast<uint64_t>(v));
}

inline void append_string(Bytes& out, const std::string& s) {
    append_u32_be(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

inline std::string to_hex(std::span<const uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (uint8_t b : data) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

inline Bytes from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("invalid hex digit");
    };
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<uint8_t>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
    return out;
}

inline Digest digest_from_hex(const std::string& hex) {
    Bytes raw = from_hex(hex);
    if (raw.size() != 32) throw std::invalid_argument("digest must be 32 bytes");
    Digest d;
    std::copy(raw.begin(), raw.end(), d.begin());
    return d;
}

inline std::string to_hex(const Digest& d) { return to_hex(std::span<const uint8_t>(d.data(), d.size())); }

}  // namespace ovpp
