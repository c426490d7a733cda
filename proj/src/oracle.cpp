#include "tebounds/oracle.hpp"

#include "tebounds/bounds.hpp"
#include "tebounds/error.hpp"
#include "tebounds/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tebounds {

namespace {

// Per-arm probabilities of "first transition at s" for s = 1..t, then "none".
using Categories = std::array<std::vector<double>, 2>;

Categories categories_from_hazards(std::span<const double> h_treated, std::span<const double> h_control) {
    Categories cat;
    const std::array<std::span<const double>, 2> h{h_control, h_treated};
    for (std::size_t d = 0; d < 2; ++d) {
        double surv = 1.0;
        for (double hz : h[d]) {
            if (!(hz >= 0.0 && hz <= 1.0)) throw Error(ErrorCode::InvalidParams, "hazard outside [0,1]");
            cat[d].push_back(surv * hz);
            surv *= 1.0 - hz;
        }
        cat[d].push_back(surv);
    }
    return cat;
}

Categories categories_of(const ObservableMargins& m) {
    Categories cat;
    for (std::size_t d = 0; d < 2; ++d) cat[d] = {m.arm[d].exit1, m.arm[d].exit2, m.arm[d].stay};
    return cat;
}

int first_exit(unsigned path, int t) {
    for (int s = 0; s < t; ++s) {
        if (path & (1u << s)) return s;
    }
    return t;
}

// Cell c: treated path in the high t bits, control path in the low t bits;
// bit s-1 of a path is the outcome in period s.
struct Polytope {
    int t = 0;
    std::size_t cells = 0;
    std::vector<std::vector<double>> A;
    std::vector<double> b;

    unsigned treated(std::size_t c) const { return static_cast<unsigned>(c >> t); }
    unsigned control(std::size_t c) const { return static_cast<unsigned>(c) & ((1u << t) - 1u); }
};

Polytope build(int t, const Categories& cat) {
    Polytope poly;
    poly.t = t;
    poly.cells = std::size_t{1} << (2 * t);
    for (std::size_t d = 0; d < 2; ++d) {
        if (cat[d].size() != static_cast<std::size_t>(t) + 1) throw Error(ErrorCode::InvalidParams, "margin size mismatch");
        for (int k = 0; k <= t; ++k) {
            std::vector<double> row(poly.cells, 0.0);
            for (std::size_t c = 0; c < poly.cells; ++c) {
                const unsigned path = d == 1 ? poly.treated(c) : poly.control(c);
                if (first_exit(path, t) == k) row[c] = 1.0;
            }
            poly.A.push_back(std::move(row));
            poly.b.push_back(cat[d][static_cast<std::size_t>(k)]);
        }
    }
    return poly;
}

Interval optimize_ratio(const Polytope& poly, const std::vector<double>& num, double denom) {
    std::vector<double> neg(num.size());
    for (std::size_t i = 0; i < num.size(); ++i) neg[i] = -num[i];
    const auto lo = simplex_minimize(poly.A, poly.b, num);
    const auto hi = simplex_minimize(poly.A, poly.b, neg);
    if (lo.status != LpResult::Status::Optimal || hi.status != LpResult::Status::Optimal) {
        throw Error(ErrorCode::Infeasible, "margins admit no joint distribution");
    }
    return {lo.value / denom, -hi.value / denom};
}

Interval counterfactual_lp(int t, const Categories& cat) {
    const auto poly = build(t, cat);
    double s1 = 1.0;
    for (int s = 0; s < t - 1; ++s) s1 -= cat[1][static_cast<std::size_t>(s)];
    if (s1 <= 0.0) throw Error(ErrorCode::Infeasible, "no treated survivors to condition on");
    const unsigned before = (1u << (t - 1)) - 1u;
    std::vector<double> num(poly.cells, 0.0);
    for (std::size_t c = 0; c < poly.cells; ++c) {
        if ((poly.treated(c) & before) == 0 && (poly.control(c) >> (t - 1)) & 1u) num[c] = 1.0;
    }
    return optimize_ratio(poly, num, s1);
}

}  // namespace

ObservableMargins margins_from_hazards(double h1_1, double h1_2, double h0_1, double h0_2) {
    ObservableMargins m;
    const std::array<std::array<double, 2>, 2> h{{{h0_1, h0_2}, {h1_1, h1_2}}};
    for (std::size_t d = 0; d < 2; ++d) {
        m.arm[d].exit1 = h[d][0];
        m.arm[d].exit2 = (1.0 - h[d][0]) * h[d][1];
        m.arm[d].stay = (1.0 - h[d][0]) * (1.0 - h[d][1]);
    }
    return m;
}

ObservableMargins margins_of(const JointOutcomeTable& jt) {
    ObservableMargins m;
    m.arm[0] = {0.0, 0.0, 0.0};
    m.arm[1] = {0.0, 0.0, 0.0};
    for (int c = 0; c < 16; ++c) {
        const int d1 = (c >> 3) & 1, d2 = (c >> 2) & 1, d3 = (c >> 1) & 1, d4 = c & 1;
        const double p = jt.p[static_cast<std::size_t>(c)];
        auto& tr = m.arm[1];
        (d1 ? tr.exit1 : (d2 ? tr.exit2 : tr.stay)) += p;
        auto& co = m.arm[0];
        (d3 ? co.exit1 : (d4 ? co.exit2 : co.stay)) += p;
    }
    return m;
}

ArmEstimates estimates_from_margins(const ObservableMargins& m) {
    std::array<std::array<double, 2>, 2> h{};
    for (std::size_t d = 0; d < 2; ++d) {
        h[d][0] = m.arm[d].exit1;
        const double surv = 1.0 - m.arm[d].exit1;
        h[d][1] = surv > 0.0 ? std::min(1.0, m.arm[d].exit2 / surv) : 0.0;
    }
    auto est = ArmEstimates::from_hazards(h[1], h[0]);
    // Keep the margins themselves rather than their hazard round trip.
    for (std::size_t d = 0; d < 2; ++d) {
        est.survival[d][1] = 1.0 - m.arm[d].exit1;
        est.joint[d][1] = m.arm[d].exit1;
        est.joint[d][2] = m.arm[d].exit2;
        est.survival[d][2] = m.arm[d].stay;
    }
    return est;
}

Interval lp_counterfactual_bounds_t2(const ObservableMargins& m) {
    if (m.arm[1].exit1 >= 1.0) throw Error(ErrorCode::Infeasible, "no treated survivors to condition on");
    return counterfactual_lp(2, categories_of(m));
}

Interval lp_counterfactual_bounds(std::span<const double> h_treated, std::span<const double> h_control) {
    const auto t = static_cast<int>(h_treated.size());
    if (t < 1 || t > 3 || h_control.size() != h_treated.size()) {
        throw Error(ErrorCode::InvalidParams, "general oracle supports 1 <= t <= 3");
    }
    return counterfactual_lp(t, categories_from_hazards(h_treated, h_control));
}

SurvivorMeans lp_survivor_means_t2(const ObservableMargins& m) {
    const auto poly = build(2, categories_of(m));
    // Variables: y (16 cells) then the scale s; y = s * p.
    const std::size_t n = poly.cells + 1;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < poly.A.size(); ++i) {
        auto row = poly.A[i];
        row.push_back(-poly.b[i]);
        A.push_back(std::move(row));
        b.push_back(0.0);
    }
    std::vector<double> denom(n, 0.0), num1(n, 0.0), num0(n, 0.0);
    for (std::size_t c = 0; c < poly.cells; ++c) {
        const unsigned tr = poly.treated(c), co = poly.control(c);
        if ((tr & 1u) || (co & 1u)) continue;
        denom[c] = 1.0;
        if (tr & 2u) num1[c] = 1.0;
        if (co & 2u) num0[c] = 1.0;
    }
    A.push_back(denom);
    b.push_back(1.0);

    auto range = [&](const std::vector<double>& num) {
        std::vector<double> neg(n);
        for (std::size_t i = 0; i < n; ++i) neg[i] = -num[i];
        const auto lo = simplex_minimize(A, b, num);
        const auto hi = simplex_minimize(A, b, neg);
        if (lo.status != LpResult::Status::Optimal || hi.status != LpResult::Status::Optimal) {
            throw Error(ErrorCode::Undefined, "no joint distribution with joint survivors");
        }
        return Interval{lo.value, -hi.value};
    };
    return {range(num1), range(num0)};
}

ExactEffects exact_effects(const JointOutcomeTable& jt) {
    double surv1 = 0.0, both = 0.0, diff1 = 0.0, diff_both = 0.0;
    for (int c = 0; c < 16; ++c) {
        const int d1 = (c >> 3) & 1, d2 = (c >> 2) & 1, d3 = (c >> 1) & 1, d4 = c & 1;
        const double p = jt.p[static_cast<std::size_t>(c)];
        if (d1 != 0) continue;
        surv1 += p;
        diff1 += p * (d2 - d4);
        if (d3 == 0) {
            both += p;
            diff_both += p * (d2 - d4);
        }
    }
    ExactEffects e;
    if (surv1 > 0.0) e.atets2 = diff1 / surv1;
    if (both > 0.0) e.ates2 = diff_both / both;
    return e;
}

bool absorbing_check(const JointOutcomeTable& jt) {
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            if (jt(1, 1, a, b) != 0.0 || jt(a, b, 1, 1) != 0.0) return false;
        }
    }
    return true;
}

OracleCheckSummary oracle_check(int trials, std::uint64_t seed, int t, double tol) {
    if (t != 2 && t != 3) throw Error(ErrorCode::InvalidParams, "oracle check supports t = 2 or 3");
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&](bool allow_one) {
        const double u = unif(eng);
        if (u < 0.05) return 0.0;
        if (allow_one && u < 0.10) return 1.0;
        return unif(eng);
    };
    OracleCheckSummary s;
    for (int i = 0; i < trials; ++i) {
        std::vector<double> h1(static_cast<std::size_t>(t)), h0(static_cast<std::size_t>(t));
        for (int s_ = 0; s_ < t; ++s_) {
            // Treated survival through t-1 must stay positive.
            h1[static_cast<std::size_t>(s_)] = draw(s_ == t - 1);
            h0[static_cast<std::size_t>(s_)] = draw(true);
        }
        Interval lp;
        std::optional<CounterfactualInterval> cf;
        if (t == 2) {
            const auto m = margins_from_hazards(h1[0], h1[1], h0[0], h0[1]);
            lp = lp_counterfactual_bounds_t2(m);
            cf = counterfactual_interval(estimates_from_margins(m), 2);
        } else {
            lp = lp_counterfactual_bounds(h1, h0);
            cf = counterfactual_interval(ArmEstimates::from_hazards(h1, h0), t);
        }
        ++s.trials;
        if (!cf) continue;
        const double diff = std::max(std::fabs(lp.lo - cf->lo), std::fabs(lp.hi - cf->hi));
        s.max_abs_diff = std::max(s.max_abs_diff, diff);
        if (diff <= tol) ++s.matches;
    }
    return s;
}

}  // namespace tebounds
