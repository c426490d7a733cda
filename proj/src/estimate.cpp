#include "tebounds/estimate.hpp"

#include "tebounds/error.hpp"

namespace tebounds {

namespace {

void allocate(ArmEstimates& est, int t_max) {
    est.t_max = t_max;
    const auto len = static_cast<std::size_t>(t_max) + 1;
    for (std::size_t d = 0; d < 2; ++d) {
        est.hazard[d].assign(len, 0.0);
        est.survival[d].assign(len, 1.0);
        est.joint[d].assign(len, 0.0);
        est.hazard_defined[d].assign(len, 0);
        est.risk[d].assign(len, 0);
        est.events[d].assign(len, 0);
        est.censored[d].assign(len, 0);
    }
}

}  // namespace

ArmEstimates ArmEstimates::from_hazards(std::span<const double> treated, std::span<const double> control) {
    if (treated.size() != control.size() || treated.empty()) {
        throw Error(ErrorCode::InvalidParams, "hazard vectors must be non-empty and of equal length");
    }
    ArmEstimates est;
    allocate(est, static_cast<int>(treated.size()));
    const std::array<std::span<const double>, 2> h{control, treated};
    for (std::size_t d = 0; d < 2; ++d) {
        for (std::size_t t = 1; t <= h[d].size(); ++t) {
            const double hz = h[d][t - 1];
            if (!(hz >= 0.0 && hz <= 1.0)) throw Error(ErrorCode::InvalidParams, "hazard outside [0,1]");
            const double prev = est.survival[d][t - 1];
            if (prev > 0.0) {
                est.hazard[d][t] = hz;
                est.hazard_defined[d][t] = 1;
                est.joint[d][t] = hz * prev;
                est.survival[d][t] = prev * (1.0 - hz);
            } else {
                est.survival[d][t] = 0.0;
            }
        }
    }
    return est;
}

LifeTableCounts tally(const PanelDataset& ds, int t_max) {
    if (t_max < 1) throw Error(ErrorCode::InvalidParams, "t_max must be >= 1");
    LifeTableCounts c;
    c.t_max = t_max;
    const auto len = static_cast<std::size_t>(t_max) + 1;
    for (std::size_t d = 0; d < 2; ++d) {
        c.events[d].assign(len, 0);
        c.censored[d].assign(len, 0);
    }
    for (const auto& r : ds.records()) {
        const auto d = static_cast<std::size_t>(r.arm);
        ++c.n[d];
        if (r.duration > t_max) {
            ++c.censored[d][len - 1];
        } else if (r.event) {
            ++c.events[d][static_cast<std::size_t>(r.duration)];
        } else {
            ++c.censored[d][static_cast<std::size_t>(r.duration)];
        }
    }
    return c;
}

ArmEstimates estimates_from_counts(const LifeTableCounts& c) {
    ArmEstimates est;
    allocate(est, c.t_max);
    est.n = c.n;
    for (std::size_t d = 0; d < 2; ++d) {
        long at_risk = c.n[d];
        for (std::size_t t = 1; t <= static_cast<std::size_t>(c.t_max); ++t) {
            est.risk[d][t] = at_risk;
            est.events[d][t] = c.events[d][t];
            est.censored[d][t] = c.censored[d][t];
            const double prev = est.survival[d][t - 1];
            if (at_risk > 0) {
                const double hz = static_cast<double>(c.events[d][t]) / static_cast<double>(at_risk);
                est.hazard[d][t] = hz;
                est.hazard_defined[d][t] = 1;
                est.joint[d][t] = hz * prev;
                est.survival[d][t] = prev * (1.0 - hz);
            } else {
                est.survival[d][t] = prev;
            }
            at_risk -= c.events[d][t] + c.censored[d][t];
        }
    }
    return est;
}

ArmEstimates arm_estimates(const PanelDataset& ds, int t_max) {
    ds.require_both_arms();
    return estimates_from_counts(tally(ds, t_max));
}

ArmEstimates arm_estimates_from_k(const PanelDataset& ds, int k, int t_max) {
    const auto sample = restrict_to_start(ds, k);
    if (sample.arm_count(1) == 0 || sample.arm_count(0) == 0) {
        throw Error(ErrorCode::EmptyArm, "no units satisfy the conditioning event for treatment start " + std::to_string(k));
    }
    return estimates_from_counts(tally(sample, t_max));
}

}  // namespace tebounds
