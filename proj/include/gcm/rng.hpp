#pragma once

#include <cstdint>
#include <random>

namespace gcm {

// Seeded RNG with an explicit bit-to-double mapping. mt19937_64 output is
// pinned by the standard; std::uniform_real_distribution is not, so the
// mapping is done by hand to keep streams identical everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0
    std::uint64_t uniform_int(std::uint64_t n) { return eng_() % n; }

private:
    std::mt19937_64 eng_;
};

} // namespace gcm
