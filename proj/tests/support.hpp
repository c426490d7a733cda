#pragma once

#include "tebounds/estimate.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace testsupport {

// splitmix64; tests draw from this so generated inputs never depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool chance(double p) { return uniform() < p; }

    // A probability with exact 0 and 1 mixed in.
    double probability(double p_zero = 0.05, double p_one = 0.05) {
        const double u = uniform();
        if (u < p_zero) return 0.0;
        if (u < p_zero + p_one) return 1.0;
        return uniform();
    }

private:
    std::uint64_t state_;
};

// Two-period estimates with the given period-2 hazards and survivals through period 1.
inline tebounds::ArmEstimates two_period(double h1, double h0, double S1, double S0) {
    const std::vector<double> treated{1.0 - S1, h1};
    const std::vector<double> control{1.0 - S0, h0};
    return tebounds::ArmEstimates::from_hazards(treated, control);
}

// Random per-period hazards with treated survival through t-1 kept positive.
inline tebounds::ArmEstimates random_estimates(Rng& rng, int t) {
    std::vector<double> treated(static_cast<std::size_t>(t)), control(static_cast<std::size_t>(t));
    for (int s = 0; s < t; ++s) {
        treated[static_cast<std::size_t>(s)] = s + 1 < t ? rng.probability(0.1, 0.0) * 0.95 : rng.probability();
        control[static_cast<std::size_t>(s)] = rng.probability();
    }
    return tebounds::ArmEstimates::from_hazards(treated, control);
}

}  // namespace testsupport
