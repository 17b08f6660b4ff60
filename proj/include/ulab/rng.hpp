#pragma once

#include <cstdint>

namespace ulab::rng {

// Counter-based random streams: every draw is a pure function of (key, counter),
// never of call order, so parallel scheduling cannot perturb results. A stream
// key is derived from the master seed plus up to three path words (domain tag,
// replication index, column index); the counter is the draw position.

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer
inline std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t combine(std::uint64_t key, std::uint64_t word) {
    return mix(key ^ (kGamma + word * 0xd1342543de82ef95ULL));
}

// Domain tags keep unrelated consumers of the same master seed independent.
enum Tag : std::uint64_t {
    kTagSample = 1,
    kTagSign = 2,
    kTagRestart = 3,
    kTagOracle = 4,
    kTagEnvelope = 5,
    kTagCalibration = 6,
};

struct Stream {
    std::uint64_t key = 0;

    static Stream from(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
        Stream s;
        s.key = combine(combine(combine(seed, a), b), c);
        return s;
    }

    std::uint64_t bits(std::uint64_t counter) const { return mix(key + kGamma * counter); }

    // uniform in [0, 1), 53-bit resolution
    double uniform(std::uint64_t counter) const { return double(bits(counter) >> 11) * 0x1.0p-53; }

    // uniform in [-1, 1)
    double symmetric(std::uint64_t counter) const { return 2.0 * uniform(counter) - 1.0; }

    // Rademacher sign
    int sign(std::uint64_t counter) const { return (bits(counter) & 1u) ? 1 : -1; }
};

}  // namespace ulab::rng
