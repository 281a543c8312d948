#pragma once

#include <cmath>
#include <cstdint>

namespace fnolab {

// splitmix64 (Steele/Lea/Flood). Fixed-width integer arithmetic only, so
// every stream is reproducible across platforms and standard libraries;
// std::normal_distribution is implementation-defined and deliberately avoided.
struct SplitMix64 {
    std::uint64_t state;
    constexpr std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

constexpr std::uint64_t hash64(std::uint64_t x) {
    SplitMix64 s{x};
    return s.next();
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return hash64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 12) + (h >> 4)));
}

// FNV-1a over a string tag; lets call sites name streams readably.
constexpr std::uint64_t stream_tag(const char* s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (; *s; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 0x100000001b3ull;
    return h;
}

// Counter-style keyed generator: the sequence depends only on
// (seed, stream, index), never on how many draws other streams made.
class KeyedRng {
  public:
    KeyedRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : sm_{hash_combine(hash_combine(hash64(seed), stream), index)} {}
    KeyedRng(std::uint64_t seed, const char* stream, std::uint64_t index)
        : KeyedRng(seed, stream_tag(stream), index) {}

    std::uint64_t next_u64() { return sm_.next(); }

    // [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller, spare value cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    SplitMix64 sm_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace fnolab
