#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "coevo/errors.hpp"

namespace coevo {

namespace detail {

// SplitMix64 output mixer (Steele, Lea & Flood 2014). Fully specified on
// uint64, so streams are bit-identical on every platform.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

} // namespace detail

/// Counter-based random stream: draw i is mix64(seed + (i+1)*golden), the
/// SplitMix64 sequence. The next value is a pure function of (seed, counter),
/// so any position in a stream can be reproduced from the draw count alone.
struct SeededStream {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    SeededStream() = default;
    explicit SeededStream(std::uint64_t s) : seed(s) {}

    std::uint64_t next_u64() {
        ++counter;
        return detail::mix64(seed + counter * detail::kGolden);
    }

    /// Uniform in [0, 1), 53-bit mantissa.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1]; safe as a log() argument.
    double next_open_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Always consumes exactly two draws and
    /// never caches the sine branch, so stream position stays a pure function
    /// of the number of calls.
    double next_normal() {
        const double u1 = next_open_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Uniform index in [0, n) by fixed-point multiply (no modulo bias to
    /// within 2^-64, and no data-dependent draw count).
    std::size_t next_index(std::size_t n) {
        require(n > 0, "next_index: n must be positive");
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
        return static_cast<std::size_t>(wide >> 64);
    }
};

/// Child stream seed for a labeled substream of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return detail::mix64(seed ^ detail::mix64(tag + detail::kGolden));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t sub) {
    return derive_seed(derive_seed(seed, tag), sub);
}

/// Run-seed derivation: FNV-1a over (base_seed, method name, run index),
/// finished with mix64. Stable across versions; documented in the README.
inline std::uint64_t stable_hash(std::uint64_t base_seed, std::string_view method,
                                 std::uint64_t run_index) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto eat_byte = [&h](unsigned char b) {
        h ^= b;
        h *= 0x100000001b3ull;
    };
    auto eat_u64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) eat_byte(static_cast<unsigned char>(v >> (8 * i)));
    };
    eat_u64(base_seed);
    for (char c : method) eat_byte(static_cast<unsigned char>(c));
    eat_u64(run_index);
    return detail::mix64(h);
}

} // namespace coevo
