#include "tebounds/error.hpp"
#include "tebounds/normal.hpp"
#include "tebounds/simulate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace tebounds {

namespace {

constexpr int kHermiteNodes = 48;

struct Atom {
    double value;
    double weight;
};

// Gauss-Hermite rule for the standard normal (Golub-Welsch).
std::vector<Atom> normal_nodes(int k) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i < k; ++i) {
        jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    std::vector<Atom> out;
    for (int i = 0; i < k; ++i) {
        const double v0 = eig.eigenvectors()(0, i);
        out.push_back({eig.eigenvalues()(i), v0 * v0});
    }
    return out;
}

std::vector<Atom> frailty_atoms(const FrailtySpec& v) {
    switch (v.kind) {
        case FrailtySpec::Kind::PointMass: return {{v.values.at(0), 1.0}};
        case FrailtySpec::Kind::TwoPoint: return {{v.values.at(0), v.weight}, {v.values.at(1), 1.0 - v.weight}};
        case FrailtySpec::Kind::Normal: {
            auto atoms = normal_nodes(kHermiteNodes);
            for (auto& a : atoms) a.value *= v.sd;
            return atoms;
        }
    }
    return {};
}

std::vector<Atom> gamma_atoms(const GammaSpec& g) {
    if (g.kind == GammaSpec::Kind::Constant) return {{g.values.at(0), 1.0}};
    return {{g.values.at(0), g.weight}, {g.values.at(1), 1.0 - g.weight}};
}

double shock_cdf(ShockDist dist, double x) {
    if (dist == ShockDist::Normal) return normal_cdf(x);
    return 1.0 / (1.0 + std::exp(-x));
}

double lognormal_cdf(double x, double mu, double sigma) {
    if (x <= 0.0) return 0.0;
    return normal_cdf((std::log(x) - mu) / sigma);
}

TypeMixture duration_mixture(const DurationDgpParams& p) {
    TypeMixture mix;
    mix.t_max = p.t_max;
    for (const auto& v : frailty_atoms(p.v)) {
        for (const auto& g : gamma_atoms(p.gamma)) {
            TypeMixture::Row row;
            row.weight = v.weight * g.weight;
            for (int t = 0; t < p.t_max; ++t) {
                const double a0 = p.alpha[static_cast<std::size_t>(t)] + v.value;
                const double a1 = a0 + g.value;
                const double q0 = shock_cdf(p.shock_dist, a0);
                const double q1 = shock_cdf(p.shock_dist, a1);
                row.q0.push_back(q0);
                row.q1.push_back(q1);
                row.q11.push_back(p.shock_mode == ShockMode::Shared ? shock_cdf(p.shock_dist, std::min(a0, a1)) : q0 * q1);
            }
            mix.rows.push_back(std::move(row));
        }
    }
    return mix;
}

TypeMixture job_search_mixture(const JobSearchParams& p) {
    TypeMixture mix;
    mix.t_max = p.t_max;
    for (std::size_t k = 0; k < p.offer_scale.size(); ++k) {
        TypeMixture::Row row;
        row.weight = p.type_weight[k];
        for (std::size_t t = 0; t < static_cast<std::size_t>(p.t_max); ++t) {
            const double offer = std::clamp(p.offer_prob[t] * p.offer_scale[k], 0.0, 1.0);
            const double x1 = p.xi_treated[t], x0 = p.xi_control[t];
            row.q1.push_back(offer * (1.0 - lognormal_cdf(x1, p.wage_mu, p.wage_sigma)));
            row.q0.push_back(offer * (1.0 - lognormal_cdf(x0, p.wage_mu, p.wage_sigma)));
            row.q11.push_back(offer * (1.0 - lognormal_cdf(std::max(x1, x0), p.wage_mu, p.wage_sigma)));
        }
        mix.rows.push_back(std::move(row));
    }
    return mix;
}

std::size_t ix(int t) { return static_cast<std::size_t>(t - 1); }

// Pr(both arms survive period s | type).
double both_stay(const TypeMixture::Row& r, int s) { return 1.0 - r.q1[ix(s)] - r.q0[ix(s)] + r.q11[ix(s)]; }

}  // namespace

int dgp_t_max(const DgpSpec& dgp) {
    return std::visit([](const auto& p) { return p.t_max; }, dgp);
}

void validate(const DgpSpec& dgp) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); };
    if (const auto* p = std::get_if<DurationDgpParams>(&dgp)) {
        if (p->t_max < 1 || p->t_max > 31) fail("t_max must lie in 1..31");
        if (p->alpha.size() != static_cast<std::size_t>(p->t_max)) fail("alpha needs one value per period");
        const auto& g = p->gamma;
        if (g.kind == GammaSpec::Kind::Constant) {
            if (g.values.empty()) fail("gamma needs a value");
        } else {
            if (g.values.size() != 2) fail("two-point gamma needs two values");
            if (!(g.weight > 0.0 && g.weight < 1.0)) fail("gamma weight must lie in (0,1)");
            const bool mixed = (g.values[0] < 0.0 && g.values[1] > 0.0) || (g.values[0] > 0.0 && g.values[1] < 0.0);
            if (g.kind == GammaSpec::Kind::Heterogeneous && mixed) fail("heterogeneous gamma must keep one sign");
            if (g.kind == GammaSpec::Kind::MixedSign && !mixed) fail("mixed-sign gamma needs values of both signs");
        }
        if (p->v.kind == FrailtySpec::Kind::TwoPoint &&
            (p->v.values.size() != 2 || !(p->v.weight > 0.0 && p->v.weight < 1.0))) {
            fail("two-point frailty needs two values and a weight in (0,1)");
        }
        if (p->v.kind == FrailtySpec::Kind::PointMass && p->v.values.empty()) fail("frailty needs a value");
        if (p->v.kind == FrailtySpec::Kind::Normal && !(p->v.sd > 0.0)) fail("frailty sd must be positive");
        if (!(p->serial_corr > -1.0 && p->serial_corr < 1.0)) fail("serial_corr must lie in (-1,1)");
        return;
    }
    const auto& p = std::get<JobSearchParams>(dgp);
    const auto T = static_cast<std::size_t>(p.t_max);
    if (p.t_max < 1 || p.t_max > 31) fail("t_max must lie in 1..31");
    if (p.offer_prob.size() != T || p.xi_treated.size() != T || p.xi_control.size() != T) {
        fail("offer_prob and reservation wages need one value per period");
    }
    if (p.offer_scale.empty() || p.offer_scale.size() != p.type_weight.size()) fail("type weights and scales differ");
    double wsum = 0.0;
    for (double w : p.type_weight) {
        if (!(w > 0.0)) fail("type weights must be positive");
        wsum += w;
    }
    if (std::fabs(wsum - 1.0) > 1e-9) fail("type weights must sum to 1");
    for (std::size_t t = 0; t < T; ++t) {
        if (p.xi_treated[t] > p.xi_control[t]) fail("treated reservation wage exceeds the control one");
        if (!(p.offer_prob[t] >= 0.0 && p.offer_prob[t] <= 1.0)) fail("offer_prob outside [0,1]");
    }
    if (!(p.wage_sigma > 0.0)) fail("wage_sigma must be positive");
}

std::optional<TypeMixture> type_mixture(const DgpSpec& dgp) {
    validate(dgp);
    if (const auto* p = std::get_if<DurationDgpParams>(&dgp)) {
        if (p->serial_corr != 0.0) return std::nullopt;
        return duration_mixture(*p);
    }
    return job_search_mixture(std::get<JobSearchParams>(dgp));
}

TrueEffects true_effects(const TypeMixture& mix) {
    TrueEffects te;
    for (int t = 1; t <= mix.t_max; ++t) {
        double s1 = 0.0, n1 = 0.0, b = 0.0, nb = 0.0;
        for (const auto& r : mix.rows) {
            double surv1 = r.weight, both = r.weight;
            for (int s = 1; s < t; ++s) {
                surv1 *= 1.0 - r.q1[ix(s)];
                both *= both_stay(r, s);
            }
            const double diff = r.q1[ix(t)] - r.q0[ix(t)];
            s1 += surv1;
            n1 += surv1 * diff;
            b += both;
            nb += both * diff;
        }
        te.atets.push_back(s1 > 0.0 ? std::optional<double>(n1 / s1) : std::nullopt);
        te.ates.push_back(b > 0.0 ? std::optional<double>(nb / b) : std::nullopt);
    }
    return te;
}

ArmEstimates population_estimates(const TypeMixture& mix) {
    std::array<std::vector<double>, 2> hazard;
    std::array<std::vector<double>, 2> surv, joint;
    for (std::size_t d = 0; d < 2; ++d) {
        std::vector<double> s(mix.rows.size());
        for (std::size_t k = 0; k < mix.rows.size(); ++k) s[k] = mix.rows[k].weight;
        surv[d].push_back(1.0);
        for (int t = 1; t <= mix.t_max; ++t) {
            double at_risk = 0.0, exits = 0.0;
            for (std::size_t k = 0; k < mix.rows.size(); ++k) {
                const double q = d == 1 ? mix.rows[k].q1[ix(t)] : mix.rows[k].q0[ix(t)];
                at_risk += s[k];
                exits += s[k] * q;
                s[k] *= 1.0 - q;
            }
            double remaining = 0.0;
            for (double v : s) remaining += v;
            hazard[d].push_back(at_risk > 0.0 ? exits / at_risk : 0.0);
            joint[d].push_back(exits);
            surv[d].push_back(remaining);
        }
    }
    auto est = ArmEstimates::from_hazards(hazard[1], hazard[0]);
    // Direct mixture sums avoid compounding the rounding of the hazards.
    for (std::size_t d = 0; d < 2; ++d) {
        for (int t = 1; t <= mix.t_max; ++t) {
            const auto ut = static_cast<std::size_t>(t);
            est.survival[d][ut] = surv[d][ut];
            est.joint[d][ut] = est.defined(static_cast<int>(d), t) ? joint[d][ut - 1] : 0.0;
        }
    }
    return est;
}

MtrDirection check_mtr(const TypeMixture& mix, double tol) {
    bool nonneg = true, nonpos = true;
    for (const auto& r : mix.rows) {
        for (int t = 1; t <= mix.t_max; ++t) {
            const double diff = r.q1[ix(t)] - r.q0[ix(t)];
            if (diff < -tol) nonneg = false;
            if (diff > tol) nonpos = false;
        }
    }
    if (nonneg && nonpos) return MtrDirection::Both;
    if (nonneg) return MtrDirection::NonNegative;
    if (nonpos) return MtrDirection::NonPositive;
    return MtrDirection::None;
}

bool check_cs(const TypeMixture& mix, double tol) {
    for (const auto& r : mix.rows) {
        for (int t = 1; t <= mix.t_max; ++t) {
            const double q1 = r.q1[ix(t)], q0 = r.q0[ix(t)], q11 = r.q11[ix(t)];
            // Survival under treatment is at least as likely: Y0 = 0 forces Y1 = 0.
            if (q1 <= q0 && q1 - q11 > tol) return false;
            if (q1 >= q0 && q0 - q11 > tol) return false;
        }
    }
    return true;
}

bool check_pco(const TypeMixture& mix, double tol) {
    const std::size_t K = mix.rows.size();
    for (int t = 2; t <= mix.t_max; ++t) {
        std::vector<double> base(K);
        for (std::size_t k = 0; k < K; ++k) {
            base[k] = mix.rows[k].weight;
            for (int s = 1; s < t; ++s) base[k] *= both_stay(mix.rows[k], s);
        }
        for (int m = 1; m < t; ++m) {
            // exit_arm = 1: first treated exit at m, control survives through t-1.
            for (int exit_arm = 0; exit_arm < 2; ++exit_arm) {
                std::vector<double> ev(K);
                for (std::size_t k = 0; k < K; ++k) {
                    const auto& r = mix.rows[k];
                    double p = r.weight;
                    for (int s = 1; s < m; ++s) p *= both_stay(r, s);
                    p *= exit_arm == 1 ? r.q1[ix(m)] - r.q11[ix(m)] : r.q0[ix(m)] - r.q11[ix(m)];
                    for (int s = m + 1; s < t; ++s) p *= exit_arm == 1 ? 1.0 - r.q0[ix(s)] : 1.0 - r.q1[ix(s)];
                    ev[k] = p;
                }
                for (int d = 0; d < 2; ++d) {
                    double pe = 0.0, ne = 0.0, pb = 0.0, nb = 0.0;
                    for (std::size_t k = 0; k < K; ++k) {
                        const double q = d == 1 ? mix.rows[k].q1[ix(t)] : mix.rows[k].q0[ix(t)];
                        pe += ev[k];
                        ne += ev[k] * q;
                        pb += base[k];
                        nb += base[k] * q;
                    }
                    if (pe <= 0.0 || pb <= 0.0) continue;
                    if (ne / pe < nb / pb - tol) return false;
                }
            }
        }
    }
    return true;
}

}  // namespace tebounds
