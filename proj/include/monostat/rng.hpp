#pragma once

// Deterministic random streams.
//
// All randomness in the library flows through these two primitives so that a
// run is reproducible bit for bit from (seed, stream key) alone, independent
// of thread scheduling:
//
//   * Rng           -- a sequential xoshiro256++ stream, state derived from a
//                      (seed, key) pair via splitmix64.  Used inside a single
//                      Monte Carlo chunk.
//   * keyed_uniform -- a pure counter-based uniform: hash(seed, key, index)
//                      mapped to [0,1).  Used where draws must not depend on
//                      iteration order at all (e.g. per-edge coin flips).
//
// Normal deviates use Box-Muller on top of the stream; we do not rely on
// std::normal_distribution, whose output differs across standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace monostat {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

// 53-bit uniform in [0,1) from a 64-bit word.
inline double u64_to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

// Counter-based uniform draw: independent of call order.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t key, std::uint64_t index) {
    return u64_to_unit(mix3(seed, key, index));
}

class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t key) {
        std::uint64_t x = splitmix64(seed) ^ (0x6a09e667f3bcc909ull + key);
        for (auto& w : s_) w = x = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform() { return u64_to_unit(next_u64()); }

    // integer in {0, ..., m-1}
    int below(int m) {
        int v = static_cast<int>(uniform() * m);
        return v < m ? v : m - 1;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0x1.0p-60) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Fixed stream keys, one per purpose, so that independent parts of a run
// never share a stream even under the same user seed.
namespace stream {
inline constexpr std::uint64_t coloring = 0x01;
inline constexpr std::uint64_t gaussian = 0x02;
inline constexpr std::uint64_t limit = 0x03;
inline constexpr std::uint64_t chisq = 0x04;
inline constexpr std::uint64_t layer_edges = 0x05;
inline constexpr std::uint64_t q2 = 0x06;
inline constexpr std::uint64_t generic = 0x07;
}  // namespace stream

// Key for chunk `chunk` of purpose `purpose`.
inline std::uint64_t chunk_key(std::uint64_t purpose, std::uint64_t chunk) {
    return (purpose << 40) ^ chunk;
}

}  // namespace monostat
