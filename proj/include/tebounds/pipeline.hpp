#pragma once

#include "tebounds/error.hpp"
#include "tebounds/infer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tebounds {

struct AnalysisConfig {
    int t_max = 1;
    std::vector<AssumptionRegime> regimes;
    bool with_ci = true;
    double alpha = 0.05;
    double alpha_pre = 0.001;
    int bootstrap = 399;
    std::uint64_t seed = 0;
    bool simulated_critical = false;
    int simulation_draws = 100'000;
    Execution exec = Execution::Parallel;
};

/// Everything computed for one (t, regime) cell.
struct RowResult {
    int t = 1;
    AssumptionRegime regime;
    BoundsResult bounds;
    std::optional<AVector> avec;
    std::optional<CovMatrix> cov;
    std::optional<ConfidenceInterval> ci;
    std::optional<ErrorCode> error;  // set when the cell failed for a data reason
    std::string error_message;
};

/// Bounds for every (t, regime) and, when requested, confidence intervals
/// from one shared bootstrap. `ds` is the sample the estimates came from.
std::vector<RowResult> analyze(const PanelDataset& ds, const ArmEstimates& est, const AnalysisConfig& cfg);

/// Bounds only, for population or fixed estimates.
std::vector<RowResult> analyze_bounds(const ArmEstimates& est, int t_max, const std::vector<AssumptionRegime>& regimes);

}  // namespace tebounds
