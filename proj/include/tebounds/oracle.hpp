#pragma once

#include "tebounds/estimate.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tebounds {

/// Distribution of (Y1^1, Y2^1, Y1^0, Y2^0); cell index d1*8 + d2*4 + d3*2 + d4.
struct JointOutcomeTable {
    std::array<double, 16> p{};

    static constexpr std::size_t index(int d1, int d2, int d3, int d4) {
        return static_cast<std::size_t>(d1 * 8 + d2 * 4 + d3 * 2 + d4);
    }
    double operator()(int d1, int d2, int d3, int d4) const { return p[index(d1, d2, d3, d4)]; }
};

/// Per arm: Pr(Y1 = 1), Pr(Y = (0,1)), Pr(Y = (0,0)); arm index 1 = treated.
struct ObservableMargins {
    struct Arm {
        double exit1 = 0.0;
        double exit2 = 0.0;
        double stay = 1.0;
    };
    std::array<Arm, 2> arm;
};

ObservableMargins margins_from_hazards(double h1_1, double h1_2, double h0_1, double h0_2);
ObservableMargins margins_of(const JointOutcomeTable& jt);

/// Two-period life-table estimates carrying the given margins.
ArmEstimates estimates_from_margins(const ObservableMargins& m);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Range of E(Y2^0 | Y1^1 = 0) over all joint tables with these margins.
/// Throws Infeasible when the margins admit no table or Pr(Y1 = 0 | D = 1) = 0.
Interval lp_counterfactual_bounds_t2(const ObservableMargins& m);

/// The same range at period t <= 3 over the 2^(2t)-cell table, from
/// per-arm hazards for periods 1..t (period 1 first).
Interval lp_counterfactual_bounds(std::span<const double> h_treated, std::span<const double> h_control);

/// Ranges of E(Y2^1 | Y1^1 = Y1^0 = 0) and E(Y2^0 | Y1^1 = Y1^0 = 0) at t = 2,
/// each a linear-fractional program solved after the Charnes-Cooper transform.
struct SurvivorMeans {
    Interval treated;
    Interval control;
};
SurvivorMeans lp_survivor_means_t2(const ObservableMargins& m);

struct ExactEffects {
    std::optional<double> atets2;
    std::optional<double> ates2;
};
ExactEffects exact_effects(const JointOutcomeTable& jt);

/// Randomized comparison of the LP optimum with the closed-form
/// random-assignment interval at period t (2 or 3). Hazards are drawn
/// uniformly, with exact 0 and 1 mixed in to exercise the clamps.
struct OracleCheckSummary {
    int trials = 0;
    int matches = 0;
    double max_abs_diff = 0.0;
};
OracleCheckSummary oracle_check(int trials, std::uint64_t seed, int t = 2, double tol = 1e-9);

/// True when no potential path has a second transition after the first.
bool absorbing_check(const JointOutcomeTable& jt);

}  // namespace tebounds
