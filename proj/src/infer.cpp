#include "tebounds/infer.hpp"

#include "tebounds/error.hpp"
#include "tebounds/normal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace tebounds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Builder {
    AVector av;
    void lower(double v, bool constant = false) { push(Side::Lower, v, constant); }
    void upper(double v, bool constant = false) { push(Side::Upper, v, constant); }
    void push(Side side, double v, bool constant) {
        av.values.push_back(v);
        av.components.push_back({side, constant});
    }
};

// The formulas mirror bounds.cpp term by term so that max/min over the
// components reproduce the clamped bounds exactly.
bool fill_atets(Builder& b, const PeriodInputs& in, const ArmEstimates& est, int t) {
    const double h1 = in.h1, S1 = in.S1, S0 = in.S0, J0 = in.J0;
    const double m = in.min_survival();
    switch (b.av.layout) {
        case ALayout::Instantaneous:
        case ALayout::NoAssumption:
            b.lower(h1 - 1.0);
            b.lower(h1 - (1.0 - S0 + J0) / S1);
            b.upper(h1);
            b.upper(h1 - ((J0 - 1.0) / S1 + 1.0));
            return true;
        case ALayout::MtrCs:
        case ALayout::MtrCsNonNeg:
        case ALayout::MtrCsNonPos:
            if (b.av.layout == ALayout::MtrCsNonNeg) {
                b.lower(0.0, true);
                b.lower(h1 - J0 / S1);
            } else {
                b.lower(h1 - 1.0);
                b.lower(h1 - (1.0 + J0 / S1 - m / S1));
            }
            if (b.av.layout == ALayout::MtrCsNonPos) {
                b.upper(0.0, true);
                b.upper(h1 - J0 / S1);
            } else {
                b.upper(h1);
                b.upper(h1 - ((J0 - S0) / S1 + m / S1));
            }
            return true;
        case ALayout::Pco: {
            const auto prod = pco_survival_product(est, t);
            if (prod.status != SurvivalProduct::Status::Positive || !in.h0) return false;
            b.lower(h1 - 1.0);
            b.lower(h1 - 1.0 + (1.0 - *in.h0) / S1 * prod.value);
            b.upper(h1);
            b.upper(h1 - ((J0 - S0) / prod.value + 1.0));
            return true;
        }
        case ALayout::PcoDegenerate:
        case ALayout::MtrCsPcoDegenerate:
            b.lower(h1 - 1.0);
            b.upper(h1);
            return true;
        case ALayout::MtrCsPco:
        case ALayout::MtrCsPcoNonNeg:
        case ALayout::MtrCsPcoNonPos:
            if (m <= 0.0 || !in.h0) return false;
            if (b.av.layout == ALayout::MtrCsPcoNonNeg) {
                b.lower(0.0, true);
                b.lower(h1 - *in.h0);
            } else {
                b.lower(h1 - 1.0);
                b.lower(h1 - 1.0 + (1.0 - *in.h0) / S1 * m);
            }
            if (b.av.layout == ALayout::MtrCsPcoNonPos) {
                b.upper(0.0, true);
                b.upper(h1 - *in.h0);
            } else {
                b.upper(h1);
                b.upper(h1 - ((J0 - S0) / m + 1.0));
            }
            return true;
        case ALayout::Ates:
            return false;
    }
    return false;
}

bool fill_ates(Builder& b, const ArmEstimates& est, int t) {
    const double S1 = est.S(1, t - 1);
    const double S0 = est.S(0, t - 1);
    const double delta = S1 + S0 - 1.0;
    if (delta <= 0.0 || !est.defined(1, t) || !est.defined(0, t)) return false;
    const double A = (est.J(1, t) + S0 - 1.0) / delta;
    const double B = est.J(0, t) / delta;
    const double C = est.J(1, t) / delta;
    const double E = (est.J(0, t) + S1 - 1.0) / delta;
    b.lower(0.0 - 1.0, true);
    b.lower(0.0 - B);
    b.lower(A - 1.0);
    b.lower(A - B);
    b.upper(1.0 - 0.0, true);
    b.upper(1.0 - E);
    b.upper(C - 0.0);
    b.upper(C - E);
    return true;
}

std::size_t arg_extreme(const AVector& av, Side side) {
    std::size_t best = av.size();
    for (std::size_t i = 0; i < av.size(); ++i) {
        if (av.components[i].side != side) continue;
        if (best == av.size()) {
            best = i;
            continue;
        }
        const bool better = side == Side::Lower ? av.values[i] > av.values[best] : av.values[i] < av.values[best];
        if (better) best = i;
    }
    return best;
}

// Standard error of a_i - a_j.
double diff_se(const CovMatrix& cov, std::size_t i, std::size_t j) {
    const double var = (cov(i, i) + cov(j, j) - 2.0 * cov(i, j)) / static_cast<double>(cov.n);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

double bonferroni(double alpha, int k) { return normal_quantile(1.0 - alpha / std::max(k, 1)); }

std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
    return std::mt19937_64(seq);
}

// Each unit reduced to its life-table cell; a resample only needs the codes.
struct CellCodes {
    int t_max = 0;
    std::vector<std::uint32_t> codes;

    std::size_t stride() const { return static_cast<std::size_t>(t_max) + 1; }
};

CellCodes encode(const PanelDataset& ds, int t_max) {
    CellCodes c;
    c.t_max = t_max;
    c.codes.reserve(ds.size());
    const auto stride = c.stride();
    for (const auto& r : ds.records()) {
        std::size_t period = static_cast<std::size_t>(std::min(r.duration, t_max));
        const bool event = r.event && r.duration <= t_max;
        const auto code = (static_cast<std::size_t>(r.arm) * 2 + (event ? 1 : 0)) * stride + period;
        c.codes.push_back(static_cast<std::uint32_t>(code));
    }
    return c;
}

LifeTableCounts resample(const CellCodes& cells, std::uint64_t seed, std::uint64_t r) {
    auto eng = replicate_engine(seed, r);
    const auto n = cells.codes.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const auto stride = cells.stride();
    std::vector<long> tally(4 * stride, 0);
    for (std::size_t i = 0; i < n; ++i) ++tally[cells.codes[pick(eng)]];

    LifeTableCounts c;
    c.t_max = cells.t_max;
    for (std::size_t d = 0; d < 2; ++d) {
        c.censored[d].assign(tally.begin() + static_cast<long>((d * 2) * stride),
                             tally.begin() + static_cast<long>((d * 2 + 1) * stride));
        c.events[d].assign(tally.begin() + static_cast<long>((d * 2 + 1) * stride),
                           tally.begin() + static_cast<long>((d * 2 + 2) * stride));
        for (std::size_t t = 0; t < stride; ++t) c.n[d] += c.censored[d][t] + c.events[d][t];
    }
    return c;
}

CovMatrix covariance_of(const std::vector<std::vector<double>>& reps, const std::vector<char>& kept, std::size_t k,
                        long n, int B, std::uint64_t seed) {
    CovMatrix cov;
    cov.k = k;
    cov.n = n;
    cov.B = B;
    cov.seed = seed;
    cov.sigma.assign(k * k, 0.0);

    std::vector<const std::vector<double>*> rows;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        if (kept[r]) rows.push_back(&reps[r]);
    }
    cov.dropped = B - static_cast<int>(rows.size());
    cov.too_many_degenerate = cov.dropped * 10 > B || rows.size() < 2;
    if (rows.size() < 2) return cov;

    // Deviations are taken from the first replicate so that identical
    // replicates give an exactly zero matrix.
    const auto& base = *rows.front();
    std::vector<double> mean(k, 0.0);
    for (const auto* row : rows) {
        for (std::size_t i = 0; i < k; ++i) mean[i] += (*row)[i] - base[i];
    }
    const double R = static_cast<double>(rows.size());
    for (auto& m : mean) m /= R;
    for (const auto* row : rows) {
        for (std::size_t i = 0; i < k; ++i) {
            const double di = (*row)[i] - base[i] - mean[i];
            for (std::size_t j = i; j < k; ++j) cov.sigma[i * k + j] += di * ((*row)[j] - base[j] - mean[j]);
        }
    }
    const double scale = static_cast<double>(n) / (R - 1.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            cov.sigma[i * k + j] *= scale;
            cov.sigma[j * k + i] = cov.sigma[i * k + j];
        }
    }
    return cov;
}

}  // namespace

std::string_view layout_name(ALayout layout) {
    switch (layout) {
        case ALayout::Instantaneous: return "instantaneous";
        case ALayout::NoAssumption: return "none";
        case ALayout::MtrCs: return "mtr-cs";
        case ALayout::MtrCsNonNeg: return "mtr-cs/nonneg";
        case ALayout::MtrCsNonPos: return "mtr-cs/nonpos";
        case ALayout::Pco: return "pco";
        case ALayout::PcoDegenerate: return "pco/degenerate";
        case ALayout::MtrCsPco: return "mtr-cs-pco";
        case ALayout::MtrCsPcoNonNeg: return "mtr-cs-pco/nonneg";
        case ALayout::MtrCsPcoNonPos: return "mtr-cs-pco/nonpos";
        case ALayout::MtrCsPcoDegenerate: return "mtr-cs-pco/degenerate";
        case ALayout::Ates: return "ates";
    }
    return "none";
}

double AVector::lower() const {
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
        if (components[i].side == Side::Lower) v = std::max(v, values[i]);
    }
    return v;
}

double AVector::upper() const {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
        if (components[i].side == Side::Upper) v = std::min(v, values[i]);
    }
    return v;
}

std::optional<ALayout> select_layout(const ArmEstimates& est, int t, AssumptionRegime regime) {
    const auto b = compute_bounds(est, t, regime);
    if (b.undefined) return std::nullopt;
    if (t == 1 || b.point_identified) return ALayout::Instantaneous;
    switch (regime.tag) {
        case Regime::NoAssumption: return ALayout::NoAssumption;
        case Regime::MtrCs:
            if (regime.sign == MtrSign::NonNegative) return ALayout::MtrCsNonNeg;
            if (regime.sign == MtrSign::NonPositive) return ALayout::MtrCsNonPos;
            return ALayout::MtrCs;
        case Regime::Pco: return b.degenerate ? ALayout::PcoDegenerate : ALayout::Pco;
        case Regime::MtrCsPco:
            if (b.degenerate) return ALayout::MtrCsPcoDegenerate;
            if (regime.sign == MtrSign::NonNegative) return ALayout::MtrCsPcoNonNeg;
            if (regime.sign == MtrSign::NonPositive) return ALayout::MtrCsPcoNonPos;
            return ALayout::MtrCsPco;
        case Regime::Ates: return ALayout::Ates;
    }
    return std::nullopt;
}

std::optional<AVector> evaluate_layout(const ArmEstimates& est, int t, AssumptionRegime regime, ALayout layout) {
    Builder b;
    b.av.t = t;
    b.av.regime = regime;
    b.av.layout = layout;
    if (layout == ALayout::Ates) {
        if (!fill_ates(b, est, t)) return std::nullopt;
        return b.av;
    }
    PeriodInputs in;
    if (period_inputs(est, t, in) != Definedness::Defined) return std::nullopt;
    if (layout == ALayout::Instantaneous && !in.h0) return std::nullopt;
    if (!fill_atets(b, in, est, t)) return std::nullopt;
    return b.av;
}

AVector a_vector(const ArmEstimates& est, int t, AssumptionRegime regime) {
    const auto layout = select_layout(est, t, regime);
    if (!layout) throw Error(ErrorCode::Undefined, "bounds undefined at t = " + std::to_string(t));
    auto av = evaluate_layout(est, t, regime, *layout);
    if (!av) throw Error(ErrorCode::Undefined, "a-vector undefined at t = " + std::to_string(t));
    return *av;
}

std::vector<LifeTableCounts> bootstrap_counts(const PanelDataset& ds, int t_max, int B, std::uint64_t seed,
                                              Execution exec) {
    if (B < 2) throw Error(ErrorCode::InvalidParams, "bootstrap needs B >= 2");
    const auto cells = encode(ds, t_max);
    std::vector<LifeTableCounts> out(static_cast<std::size_t>(B));
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (int r = 0; r < B; ++r) out[static_cast<std::size_t>(r)] = resample(cells, seed, static_cast<std::uint64_t>(r));
    } else {
        for (int r = 0; r < B; ++r) out[static_cast<std::size_t>(r)] = resample(cells, seed, static_cast<std::uint64_t>(r));
    }
    return out;
}

std::vector<CovMatrix> bootstrap_covariances(const PanelDataset& ds, int t_max, const std::vector<AVector>& targets,
                                             int B, std::uint64_t seed, Execution exec) {
    if (B < 2) throw Error(ErrorCode::InvalidParams, "bootstrap needs B >= 2");
    ds.require_both_arms();
    const auto cells = encode(ds, t_max);
    const auto nt = targets.size();
    const auto nb = static_cast<std::size_t>(B);
    // reps[target][replicate] -> a-vector values
    std::vector<std::vector<std::vector<double>>> reps(nt, std::vector<std::vector<double>>(nb));
    std::vector<std::vector<char>> kept(nt, std::vector<char>(nb, 0));

    auto run = [&](int r) {
        const auto counts = resample(cells, seed, static_cast<std::uint64_t>(r));
        const auto ur = static_cast<std::size_t>(r);
        if (counts.n[0] == 0 || counts.n[1] == 0) return;
        const auto est = estimates_from_counts(counts);
        for (std::size_t j = 0; j < nt; ++j) {
            const auto& tg = targets[j];
            auto av = evaluate_layout(est, tg.t, tg.regime, tg.layout);
            if (!av) continue;
            reps[j][ur] = std::move(av->values);
            kept[j][ur] = 1;
        }
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (int r = 0; r < B; ++r) run(r);
    } else {
        for (int r = 0; r < B; ++r) run(r);
    }

    std::vector<CovMatrix> out;
    out.reserve(nt);
    const long n = static_cast<long>(ds.size());
    for (std::size_t j = 0; j < nt; ++j) out.push_back(covariance_of(reps[j], kept[j], targets[j].size(), n, B, seed));
    return out;
}

CovMatrix bootstrap_cov(const PanelDataset& ds, int t, AssumptionRegime regime, int B, std::uint64_t seed,
                        Execution exec) {
    const auto est = arm_estimates(ds, ds.t_max());
    const auto av = a_vector(est, t, regime);
    auto cov = bootstrap_covariances(ds, ds.t_max(), {av}, B, seed, exec).front();
    if (cov.too_many_degenerate) {
        throw Error(ErrorCode::TooManyDegenerate,
                    std::to_string(cov.dropped) + " of " + std::to_string(B) + " bootstrap replicates undefined");
    }
    return cov;
}

BindingPattern pretest_decouple(const AVector& av, const CovMatrix& cov, double alpha, double alpha_pre) {
    if (cov.k != av.size()) throw Error(ErrorCode::InvalidParams, "covariance does not match the a-vector");
    if (!(alpha > 0.0 && alpha < 0.5)) throw Error(ErrorCode::InvalidParams, "alpha must lie in (0, 0.5)");
    BindingPattern p;
    p.active.assign(av.size(), 1);
    const auto il = arg_extreme(av, Side::Lower);
    const auto iu = arg_extreme(av, Side::Upper);
    const double diff = av.values[iu] - av.values[il];
    const double z_pre = normal_quantile(1.0 - alpha_pre);

    if (diff == 0.0) {
        p.statistic = 0.0;
    } else {
        const double se = diff_se(cov, il, iu);
        if (se == 0.0) {
            p.statistic = kNaN;
            p.decided_without_test = true;
            p.decoupled = diff > 0.0;
        } else {
            p.statistic = diff / se;
            p.decoupled = p.statistic > z_pre;
        }
    }

    auto count = [&](Side side) {
        int k = 0;
        for (std::size_t i = 0; i < av.size(); ++i) {
            if (av.components[i].side == side && p.active[i] && !av.components[i].constant) ++k;
        }
        return k;
    };

    if (!p.decoupled) {
        const int K = count(Side::Lower) + count(Side::Upper);
        p.k_lower = count(Side::Lower);
        p.k_upper = count(Side::Upper);
        p.critical_lower = p.critical_upper = bonferroni(alpha, K);
        return p;
    }

    // Within each side, drop components that lie significantly inside the
    // side's extreme; they cannot bind.
    for (std::size_t i = 0; i < av.size(); ++i) {
        const auto side = av.components[i].side;
        const auto best = side == Side::Lower ? il : iu;
        if (i == best) continue;
        const double gap = side == Side::Lower ? av.values[best] - av.values[i] : av.values[i] - av.values[best];
        const double se = diff_se(cov, best, i);
        const bool drop = se == 0.0 ? gap > 0.0 : gap / se > z_pre;
        if (drop) p.active[i] = 0;
    }
    p.k_lower = count(Side::Lower);
    p.k_upper = count(Side::Upper);
    p.critical_lower = bonferroni(alpha, p.k_lower);
    p.critical_upper = bonferroni(alpha, p.k_upper);
    return p;
}

double simulated_critical_value(const std::vector<double>& corr, std::size_t k, double alpha, int draws,
                                std::uint64_t seed) {
    if (draws < 1) throw Error(ErrorCode::InvalidParams, "draws must be positive");
    if (k == 0) return 0.0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = corr[i * k + j];
    }
    // Symmetric square root; tolerates the rank deficiency of the a-vector.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd root = eig.eigenvectors() * ev.asDiagonal();

    std::mt19937_64 eng = replicate_engine(seed, 0x5eed);
    std::normal_distribution<double> normal;
    std::vector<double> maxima(static_cast<std::size_t>(draws));
    Eigen::VectorXd g(static_cast<Eigen::Index>(k));
    for (auto& out : maxima) {
        for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = normal(eng);
        const Eigen::VectorXd z = root * g;
        out = std::max(0.0, z.maxCoeff());
    }
    const auto idx = static_cast<std::size_t>(std::ceil((1.0 - alpha) * draws)) - 1;
    std::nth_element(maxima.begin(), maxima.begin() + static_cast<long>(idx), maxima.end());
    return maxima[idx];
}

void apply_simulated_critical(BindingPattern& pattern, const AVector& av, const CovMatrix& cov, double alpha,
                              int draws, std::uint64_t seed) {
    // Lower components enter the moment function with the opposite sign.
    auto simulate_for = [&](bool lower, bool upper) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < av.size(); ++i) {
            const auto side = av.components[i].side;
            if (!pattern.active[i] || av.components[i].constant || cov(i, i) <= 0.0) continue;
            if ((side == Side::Lower && lower) || (side == Side::Upper && upper)) idx.push_back(i);
        }
        const auto k = idx.size();
        std::vector<double> corr(k * k);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                const auto i = idx[a], j = idx[b];
                const double sign = (av.components[i].side == av.components[j].side) ? 1.0 : -1.0;
                corr[a * k + b] = sign * cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
            }
        }
        return simulated_critical_value(corr, k, alpha, draws, seed);
    };
    if (pattern.decoupled) {
        pattern.critical_lower = simulate_for(true, false);
        pattern.critical_upper = simulate_for(false, true);
    } else {
        pattern.critical_lower = pattern.critical_upper = simulate_for(true, true);
    }
    pattern.simulated = true;
}

ConfidenceInterval confidence_interval(const AVector& av, const CovMatrix& cov, double alpha,
                                       const BindingPattern& pattern) {
    if (cov.k != av.size() || pattern.active.size() != av.size()) {
        throw Error(ErrorCode::InvalidParams, "inputs do not match the a-vector");
    }
    ConfidenceInterval ci;
    ci.alpha = alpha;
    ci.pattern = pattern;
    ci.lo = -std::numeric_limits<double>::infinity();
    ci.hi = std::numeric_limits<double>::infinity();
    const double root_n = std::sqrt(static_cast<double>(cov.n));
    for (std::size_t i = 0; i < av.size(); ++i) {
        if (!pattern.active[i]) continue;
        const double se = std::sqrt(std::max(0.0, cov(i, i))) / root_n;
        if (av.components[i].side == Side::Lower) {
            ci.lo = std::max(ci.lo, av.values[i] - pattern.critical_lower * se);
        } else {
            ci.hi = std::min(ci.hi, av.values[i] + pattern.critical_upper * se);
        }
    }
    ci.empty = ci.lo > ci.hi;
    return ci;
}

MtrSign auto_mtr_sign(const ArmEstimates& est, double alpha) {
    if (!est.defined(1, 1) || !est.defined(0, 1)) return MtrSign::Unknown;
    const double h1 = est.h(1, 1), h0 = est.h(0, 1);
    const double n1 = static_cast<double>(est.risk[1][1]), n0 = static_cast<double>(est.risk[0][1]);
    const double d = h1 - h0;
    const double se = std::sqrt(h1 * (1.0 - h1) / n1 + h0 * (1.0 - h0) / n0);
    if (se == 0.0) {
        if (d > 0.0) return MtrSign::NonNegative;
        if (d < 0.0) return MtrSign::NonPositive;
        return MtrSign::Unknown;
    }
    const double z = normal_quantile(1.0 - alpha);
    if (d / se > z) return MtrSign::NonNegative;
    if (d / se < -z) return MtrSign::NonPositive;
    return MtrSign::Unknown;
}

}  // namespace tebounds
