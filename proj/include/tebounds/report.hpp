#pragma once

#include "tebounds/pipeline.hpp"
#include "tebounds/simulate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tebounds {

struct RunInfo {
    std::string command;  // bounds, ci, simulate
    std::string input;
    int bin_width = 1;
    int t_max = 1;
    int k = 1;
    double alpha = 0.05;
    double alpha_pre = 0.001;
    int bootstrap = 399;
    std::uint64_t seed = 0;
    std::string mtr_sign_requested = "unknown";
    bool with_ci = false;
    bool simulated_critical = false;
    std::string subgroup;
};

/// The single internal record every output format is rendered from.
struct RunRecord {
    RunInfo info;
    ArmEstimates est;
    std::vector<RowResult> rows;
    std::optional<TrueEffects> truth;  // simulate only
};

std::string render_table(const RunRecord& run);
std::string render_json(const RunRecord& run);
std::string render_csv(const RunRecord& run);

/// Machine-readable error record for a failed run.
std::string error_json(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

/// True when any row failed for a data reason (an undefined estimand is not a failure).
bool has_row_errors(const RunRecord& run);

}  // namespace tebounds
