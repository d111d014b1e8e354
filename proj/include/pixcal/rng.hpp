#ifndef PIXCAL_RNG_HPP
#define PIXCAL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace pixcal {

// Stateless seed mixer (splitmix64).  Used to derive independent substream
// seeds from one base seed so that scene generation, truth draws, masks etc.
// stay reproducible and decoupled.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with manual uniform conversion.  The engine's output sequence is
// fixed by the standard, and the conversions below avoid the
// implementation-defined std::*_distribution adapters, so streams are
// bit-identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform double in (0, 1), never exactly 0 or 1
    double uniform_open() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n) by rejection
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    // inverse-transform Laplace draw
    double laplace(double location, double scale) {
        const double u = uniform_open();
        if (u < 0.5) return location + scale * std::log(2.0 * u);
        return location - scale * std::log(2.0 * (1.0 - u));
    }

private:
    std::mt19937_64 eng_;
};

} // namespace pixcal

#endif
