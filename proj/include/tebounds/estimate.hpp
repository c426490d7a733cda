#pragma once

#include "tebounds/data.hpp"

#include <array>
#include <span>
#include <vector>

namespace tebounds {

/// Per-arm life-table estimates, indexed [arm][t] with t = 0..t_max.
///
/// hazard[d][t]   Pr(Y_t = 1 | no transition before t, D = d)
/// survival[d][t] Pr(no transition through t | D = d), survival[d][0] = 1
/// joint[d][t]    Pr(Y_t = 1, no transition before t | D = d) = hazard * survival(t-1)
///
/// A hazard cell with an empty risk set is flagged undefined rather than set
/// to zero; survival is carried forward across such cells. joint is 0 when
/// survival(t-1) is 0, even if the hazard there is undefined.
struct ArmEstimates {
    int t_max = 0;
    std::array<std::vector<double>, 2> hazard;
    std::array<std::vector<double>, 2> survival;
    std::array<std::vector<double>, 2> joint;
    std::array<std::vector<char>, 2> hazard_defined;
    std::array<std::vector<long>, 2> risk;
    std::array<std::vector<long>, 2> events;
    std::array<std::vector<long>, 2> censored;
    std::array<long, 2> n{};

    double h(int d, int t) const { return hazard[idx(d)][idx(t)]; }
    double S(int d, int t) const { return survival[idx(d)][idx(t)]; }
    double J(int d, int t) const { return joint[idx(d)][idx(t)]; }
    bool defined(int d, int t) const { return hazard_defined[idx(d)][idx(t)] != 0; }

    /// Population-style estimates from per-period hazards h[d][0..t_max-1]
    /// (period 1 first). Risk-set counts are left at zero.
    static ArmEstimates from_hazards(std::span<const double> treated, std::span<const double> control);

private:
    static std::size_t idx(int i) { return static_cast<std::size_t>(i); }
};

/// Per-arm, per-period tallies: the sufficient statistics of the life table.
struct LifeTableCounts {
    int t_max = 0;
    std::array<std::vector<long>, 2> events;    // [d][t]
    std::array<std::vector<long>, 2> censored;  // [d][t]
    std::array<long, 2> n{};
};

LifeTableCounts tally(const PanelDataset& ds, int t_max);
ArmEstimates estimates_from_counts(const LifeTableCounts& counts);

/// Life-table estimates for treatment assigned in period 1.
ArmEstimates arm_estimates(const PanelDataset& ds, int t_max);

/// Estimates for a treatment started in period k (k maps to period 1).
/// Throws EmptyArm if either arm of the conditioning set is empty.
ArmEstimates arm_estimates_from_k(const PanelDataset& ds, int k, int t_max);

}  // namespace tebounds
