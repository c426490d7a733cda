#include "tebounds/simplex.hpp"

#include "tebounds/error.hpp"

#include <cmath>
#include <limits>

namespace tebounds {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

struct Tableau {
    std::size_t m = 0;     // rows
    std::size_t cols = 0;  // variables, rhs stored separately
    std::vector<std::vector<double>> a;
    std::vector<double> rhs;
    std::vector<std::size_t> basis;

    void pivot(std::size_t r, std::size_t c) {
        const double p = a[r][c];
        for (auto& v : a[r]) v /= p;
        rhs[r] /= p;
        a[r][c] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            const double f = a[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) a[i][j] -= f * a[r][j];
            a[i][c] = 0.0;
            rhs[i] -= f * rhs[r];
        }
        basis[r] = c;
    }

    // Reduced costs of cost vector `cost` for the current basis.
    std::vector<double> reduced(const std::vector<double>& cost) const {
        std::vector<double> d(cost);
        for (std::size_t i = 0; i < m; ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) d[j] -= cb * a[i][j];
        }
        return d;
    }

    // Bland's rule on columns [0, allowed); returns false when unbounded.
    bool optimize(const std::vector<double>& cost, std::size_t allowed) {
        while (true) {
            const auto d = reduced(cost);
            std::size_t enter = cols;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (d[j] < -kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols) return true;
            std::size_t leave = m;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                if (a[i][enter] <= kPivotTol) continue;
                const double ratio = rhs[i] / a[i][enter];
                if (ratio < best - 1e-15 || (std::fabs(ratio - best) <= 1e-15 && leave < m && basis[i] < basis[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave == m) return false;
            pivot(leave, enter);
        }
    }

    void drop_row(std::size_t r) {
        a.erase(a.begin() + static_cast<long>(r));
        rhs.erase(rhs.begin() + static_cast<long>(r));
        basis.erase(basis.begin() + static_cast<long>(r));
        --m;
    }
};

}  // namespace

LpResult simplex_minimize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                          const std::vector<double>& c) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    if (b.size() != m) throw Error(ErrorCode::InvalidParams, "constraint rows and rhs differ in length");
    for (const auto& row : A) {
        if (row.size() != n) throw Error(ErrorCode::InvalidParams, "constraint row has the wrong width");
    }

    Tableau tab;
    tab.m = m;
    tab.cols = n + m;
    tab.a.assign(m, std::vector<double>(n + m, 0.0));
    tab.rhs = b;
    tab.basis.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) tab.a[i][j] = s * A[i][j];
        tab.rhs[i] *= s;
        tab.a[i][n + i] = 1.0;
        tab.basis[i] = n + i;
    }

    std::vector<double> phase1(n + m, 0.0);
    for (std::size_t i = 0; i < m; ++i) phase1[n + i] = 1.0;
    tab.optimize(phase1, n + m);
    double infeas = 0.0;
    for (std::size_t i = 0; i < tab.m; ++i) {
        if (tab.basis[i] >= n) infeas += tab.rhs[i];
    }
    LpResult res;
    if (infeas > kFeasTol) {
        res.status = LpResult::Status::Infeasible;
        return res;
    }

    // Drive remaining artificials out of the basis or drop their rows.
    for (std::size_t i = 0; i < tab.m;) {
        if (tab.basis[i] < n) {
            ++i;
            continue;
        }
        std::size_t col = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::fabs(tab.a[i][j]) > kPivotTol) {
                col = j;
                break;
            }
        }
        if (col == n) {
            tab.drop_row(i);
        } else {
            tab.pivot(i, col);
            ++i;
        }
    }

    std::vector<double> phase2(n + m, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
    if (!tab.optimize(phase2, n)) {
        res.status = LpResult::Status::Unbounded;
        return res;
    }
    res.x.assign(n, 0.0);
    for (std::size_t i = 0; i < tab.m; ++i) {
        if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.rhs[i];
    }
    for (std::size_t j = 0; j < n; ++j) res.value += c[j] * res.x[j];
    return res;
}

}  // namespace tebounds
