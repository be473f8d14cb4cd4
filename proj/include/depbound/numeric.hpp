#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

namespace depbound::num {

double normal_cdf(double z);
double normal_quantile(double v);  // v in (0,1); +-inf at the ends

// Adaptive Simpson with relative tolerance and a hard subdivision cap of 2^16.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-9);

// Golden-section minimum of a unimodal-enough f on [a, b]; returns argmin.
double golden_min(const std::function<double(double)>& f, double a, double b, double xtol);

// splitmix64 finalizer; the basis of the counter RNG.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based generator: value i is a pure function of (seed, stream, i),
// so sampling can be partitioned across workers without changing the output.
struct CounterRng {
    std::uint64_t key;
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key(mix64(seed ^ mix64(stream))) {}
    std::uint64_t bits(std::uint64_t counter) const {
        return mix64(key + counter * 0x9e3779b97f4a7c15ULL);
    }
    // strictly inside (0,1) so it can feed quantile functions on either side
    double unit(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }
};

}  // namespace depbound::num
