#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "ovpp/bytes.hpp"

namespace ovpp {

using BigInt = boost::multiprecision::cpp_int;

/// The single place the field modulus is configured: 2^255 - 19.
inline const BigInt& field_modulus() {
    static const BigInt p = (BigInt(1) << 255) - 19;
    return p;
}

/// Element of the prime field Z_p.
class Fe {
  public:
    Fe() : v_(0) {}
    explicit Fe(const BigInt& v) : v_(reduce(v)) {}

    static Fe from_i64(int64_t v) {
        if (v >= 0) return Fe(BigInt(v));
        return Fe(field_modulus() - BigInt(-static_cast<BigInt>(v)));
    }

    static Fe from_u64(uint64_t v) { return Fe(BigInt(v)); }

    /// Interprets a 128-bit half of a digest as a field element.
    static Fe from_bytes16(std::span<const uint8_t> b) {
        BigInt acc = 0;
        for (uint8_t byte : b.first(16)) acc = (acc << 8) | byte;
        return Fe(acc);
    }

    Fe operator+(const Fe& o) const { return Fe(v_ + o.v_); }
    Fe operator-(const Fe& o) const { return Fe(v_ + field_modulus() - o.v_); }
    Fe operator*(const Fe& o) const { return Fe(v_ * o.v_); }
    bool operator==(const Fe&) const = default;

    bool is_zero() const { return v_ == 0; }
    const BigInt& value() const { return v_; }

    /// Signed interpretation for small elements; throws outside [-bound, bound].
    int64_t to_signed(int64_t bound) const {
        if (v_ <= BigInt(bound)) return static_cast<int64_t>(v_);
        BigInt neg = field_modulus() - v_;
        if (neg <= BigInt(bound)) return -static_cast<int64_t>(neg);
        throw std::out_of_range("field element outside signed range");
    }

    std::array<uint8_t, 32> to_bytes32() const {
        std::array<uint8_t, 32> out{};
        BigInt v = v_;
        for (int i = 31; i >= 0; --i) {
            out[i] = static_cast<uint8_t>(v & 0xff);
            v >>= 8;
        }
        return out;
    }

    static Fe from_bytes32(std::span<const uint8_t> b) {
        BigInt acc = 0;
        for (uint8_t byte : b.first(32)) acc = (acc << 8) | byte;
        return Fe(acc);
    }

    std::string to_hex() const {
        auto b = to_bytes32();
        return ovpp::to_hex(std::span<const uint8_t>(b.data(), b.size()));
    }

    static Fe from_hex(const std::string& hex) {
        Bytes b = ovpp::from_hex(hex);
        if (b.size() != 32) throw std::invalid_argument("field element hex must be 32 bytes");
        return from_bytes32(b);
    }

  private:
    static BigInt reduce(const BigInt& v) {
        BigInt r = v % field_modulus();
        if (r < 0) r += field_modulus();
        return r;
    }

    BigInt v_;
};

}  // namespace ovpp
