#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace c2l {

// Deterministic, portable random stream.
//
// State setup uses SplitMix64 and sampling uses xoshiro256** — both are pure
// 64-bit integer recurrences, so the same seed produces the same stream on
// every platform. Doubles are built from the top 53 bits of one 64-bit draw.
//
// Streams for distinct purposes (init, dropout, shuffling, data synthesis)
// are derived from one run seed via fork(tag): the tag is FNV-1a hashed and
// mixed into a fresh SplitMix64 seeding pass, so sibling streams never
// overlap by construction of the seeding path.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        seed_ = seed;
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            word = splitmix64(sm);
        }
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller with a cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    // Independent child stream for a named purpose.
    Rng fork(std::string_view tag) const {
        return Rng(splitmix_once(seed_ ^ fnv1a(tag)));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& state) {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t splitmix_once(std::uint64_t x) {
        std::uint64_t s = x;
        return splitmix64(s);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t seed_ = 0;
    std::uint64_t state_[4] = {};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace c2l
