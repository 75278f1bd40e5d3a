#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace affecta {

/// 64-bit FNV-1a, fed incrementally.
class Fnv1a {
public:
    void add_bytes(std::string_view bytes) {
        for (unsigned char c : bytes) {
            hash_ ^= c;
            hash_ *= kPrime;
        }
    }

    void add(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            hash_ ^= (v >> (8 * i)) & 0xffu;
            hash_ *= kPrime;
        }
    }

    void add(std::int64_t v) { add(static_cast<std::uint64_t>(v)); }
    void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }

    std::uint64_t value() const { return hash_; }

    std::string hex() const;

private:
    static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ull;
    static constexpr std::uint64_t kPrime = 0x100000001b3ull;
    std::uint64_t hash_ = kOffset;
};

inline std::string Fnv1a::hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) {
        out[15 - i] = kDigits[(hash_ >> (4 * i)) & 0xfu];
    }
    return out;
}

}  // namespace affecta
