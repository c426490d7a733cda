#pragma once

#include <vector>

namespace tebounds {

struct LpResult {
    enum class Status { Optimal, Infeasible, Unbounded } status = Status::Optimal;
    double value = 0.0;
    std::vector<double> x;
};

/// Minimizes c'x subject to A x = b, x >= 0 (A dense, row-major rows).
/// Two-phase tableau simplex with Bland's rule; redundant equality rows are
/// detected after phase one and dropped.
LpResult simplex_minimize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                          const std::vector<double>& c);

}  // namespace tebounds
