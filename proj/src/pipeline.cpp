#include "tebounds/pipeline.hpp"

#include "tebounds/error.hpp"

namespace tebounds {

std::vector<RowResult> analyze_bounds(const ArmEstimates& est, int t_max, const std::vector<AssumptionRegime>& regimes) {
    if (t_max < 1 || t_max > est.t_max) throw Error(ErrorCode::InvalidParams, "t_max outside the estimated horizon");
    std::vector<RowResult> rows;
    for (int t = 1; t <= t_max; ++t) {
        for (const auto& regime : regimes) {
            RowResult row;
            row.t = t;
            row.regime = regime;
            row.bounds = compute_bounds(est, t, regime);
            if (row.bounds.status == Definedness::MissingData) {
                row.error = ErrorCode::Undefined;
                row.error_message = "empty risk set with survivors remaining";
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<RowResult> analyze(const PanelDataset& ds, const ArmEstimates& est, const AnalysisConfig& cfg) {
    auto rows = analyze_bounds(est, cfg.t_max, cfg.regimes);
    if (!cfg.with_ci) return rows;

    std::vector<AVector> targets;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& row = rows[i];
        if (row.bounds.undefined) continue;
        row.avec = a_vector(est, row.t, row.regime);
        targets.push_back(*row.avec);
        owner.push_back(i);
    }
    if (targets.empty()) return rows;

    const auto covs = bootstrap_covariances(ds, cfg.t_max, targets, cfg.bootstrap, cfg.seed, cfg.exec);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        auto& row = rows[owner[j]];
        row.cov = covs[j];
        if (covs[j].too_many_degenerate) {
            row.error = ErrorCode::TooManyDegenerate;
            row.error_message = std::to_string(covs[j].dropped) + " of " + std::to_string(cfg.bootstrap) +
                                " bootstrap replicates undefined";
            continue;
        }
        auto pattern = pretest_decouple(*row.avec, covs[j], cfg.alpha, cfg.alpha_pre);
        if (cfg.simulated_critical) {
            apply_simulated_critical(pattern, *row.avec, covs[j], cfg.alpha, cfg.simulation_draws,
                                     cfg.seed ^ (static_cast<std::uint64_t>(owner[j]) << 32));
        }
        row.ci = confidence_interval(*row.avec, covs[j], cfg.alpha, pattern);
    }
    return rows;
}

}  // namespace tebounds
