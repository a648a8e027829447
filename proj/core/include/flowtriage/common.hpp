#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flowtriage {

/// Error thrown by core operations. `code` is a stable machine-readable
/// identifier (e.g. "malformed-json", "duplicate-node-id"); `what()` carries
/// the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

namespace rng {

// Deterministic helpers on top of mt19937_64. The standard pins the raw
// mt19937_64 stream but not the distribution adapters, so anything whose
// output is frozen into a file or test goes through these instead of
// std::uniform_*_distribution.

/// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
inline std::uint64_t below(std::mt19937_64& gen, std::uint64_t n) {
    if (n == 0) throw Error("rng", "below() requires n > 0");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one value per call, deterministic).
inline double normal(std::mt19937_64& gen) {
    double u1 = unit(gen);
    while (u1 <= 0.0) u1 = unit(gen);
    const double u2 = unit(gen);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& gen) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(below(gen, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace rng

/// FNV-1a over bytes; used for file checksums and prompt hashes.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

}  // namespace flowtriage
