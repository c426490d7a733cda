#pragma once

#include "tebounds/pipeline.hpp"
#include "tebounds/simulate.hpp"

#include <string>
#include <vector>

namespace tebounds {

struct CoverageConfig {
    DgpSpec dgp;
    int n = 2000;
    int reps = 500;
    double alpha = 0.05;
    double alpha_pre = 0.001;
    int bootstrap = 399;
    std::uint64_t seed = 1;
    std::vector<AssumptionRegime> regimes;
    int t_max = 0;                  // 0 = the DGP's horizon
    bool population_mode = false;   // bounds from exact population estimates, no sampling
    bool simulated_critical = false;
    long truth_units = 10'000'000;  // used only without a closed-form truth
    Execution exec = Execution::Parallel;
};

struct CoverageCell {
    int t = 1;
    AssumptionRegime regime;
    std::optional<double> truth;
    int reps_defined = 0;  // replications with defined bounds
    int errors = 0;        // replications whose interval failed; counted as misses
    int ci_covered = 0;
    int bounds_covered = 0;
    double ci_coverage = 0.0;
    double bounds_coverage = 0.0;
    double mcse = 0.0;       // sqrt(p(1-p)/reps) at the nominal level
    double threshold = 0.0;  // (1 - alpha) - 3 mcse
    double mean_ci_width = 0.0;
};

struct CoverageReport {
    CoverageConfig config;
    bool truth_simulated = false;
    std::vector<CoverageCell> cells;
};

/// Replication r simulates from a seed derived from (seed, r); the report
/// does not depend on the execution mode or thread count.
CoverageReport coverage_study(const CoverageConfig& cfg);

std::string coverage_json(const CoverageReport& report);

}  // namespace tebounds
