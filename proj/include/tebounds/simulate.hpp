#pragma once

#include "tebounds/data.hpp"
#include "tebounds/estimate.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace tebounds {

// ---------------------------------------------------------------------------
// Structural DGPs

enum class ShockMode { Shared, Independent };
enum class ShockDist { Logistic, Normal };

struct GammaSpec {
    enum class Kind { Constant, Heterogeneous, MixedSign } kind = Kind::Constant;
    // Constant uses values[0]; otherwise a two-point law on values with
    // Pr(values[0]) = weight. Heterogeneous requires one sign, MixedSign both.
    std::vector<double> values{0.0};
    double weight = 0.5;
};

struct FrailtySpec {
    enum class Kind { PointMass, TwoPoint, Normal } kind = Kind::PointMass;
    std::vector<double> values{0.0};  // PointMass: {v}; TwoPoint: {v1, v2}
    double weight = 0.5;              // Pr(v1) for TwoPoint
    double sd = 1.0;                  // Normal
};

/// Y0_t = I(eps0_t <= alpha_t + V), Y1_t = I(eps1_t <= alpha_t + gamma + V).
/// Shared shocks set eps1 = eps0. serial_corr drives an AR(1) Gaussian copula
/// on each shock sequence and may be negative for stress tests.
struct DurationDgpParams {
    int t_max = 6;
    std::vector<double> alpha;  // size t_max
    GammaSpec gamma;
    FrailtySpec v;
    ShockMode shock_mode = ShockMode::Shared;
    ShockDist shock_dist = ShockDist::Logistic;
    double serial_corr = 0.0;
};

/// Y^d_t = offer_t * I(wage_t >= xi^d_t); offer and wage are shared across
/// arms. Types scale the offer probability.
struct JobSearchParams {
    int t_max = 8;
    std::vector<double> offer_prob;         // size t_max, baseline
    std::vector<double> offer_scale{1.0};   // per type
    std::vector<double> type_weight{1.0};   // per type, sums to 1
    std::vector<double> xi_treated;         // size t_max
    std::vector<double> xi_control;         // size t_max
    double wage_mu = 0.0;                   // log-wage location
    double wage_sigma = 1.0;                // log-wage scale
};

using DgpSpec = std::variant<DurationDgpParams, JobSearchParams>;

int dgp_t_max(const DgpSpec& dgp);
void validate(const DgpSpec& dgp);  // throws InvalidParams

// ---------------------------------------------------------------------------
// Exact population quantities

/// A finite mixture of types with serially independent shocks given the type.
/// Per type and period: q1 = Pr(Y1_t = 1), q0 = Pr(Y0_t = 1), q11 = Pr(both).
struct TypeMixture {
    struct Row {
        double weight = 0.0;
        std::vector<double> q1, q0, q11;  // index t-1
    };
    int t_max = 0;
    std::vector<Row> rows;
};

/// Nullopt when the DGP has serially correlated shocks.
std::optional<TypeMixture> type_mixture(const DgpSpec& dgp);

struct TrueEffects {
    std::vector<std::optional<double>> atets;  // index t-1
    std::vector<std::optional<double>> ates;
    bool simulated = false;  // computed by a large auxiliary simulation
};

TrueEffects true_effects(const TypeMixture& mix);

/// Population hazards, survivals and joint probabilities of both arms.
ArmEstimates population_estimates(const TypeMixture& mix);

enum class MtrDirection { None, NonNegative, NonPositive, Both };

/// Sign of Pr(Y1_t = 1 | type) - Pr(Y0_t = 1 | type) common to all types and
/// periods; Both when every type has no effect.
MtrDirection check_mtr(const TypeMixture& mix, double tol = 1e-12);
bool check_cs(const TypeMixture& mix, double tol = 1e-12);
/// All four conditional-probability inequalities for every 1 <= m < t <= t_max;
/// conditioning events of probability zero are skipped.
bool check_pco(const TypeMixture& mix, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Sampling

/// Both potential paths of one unit; bit t-1 holds period t.
struct PotentialPaths {
    std::uint32_t y1 = 0;
    std::uint32_t y0 = 0;
    int effect_sign = 0;  // sign of the unit's structural effect; 0 when none
};

struct SimulatedSample {
    PanelDataset data;
    std::vector<PotentialPaths> paths;  // aligned with data.records()
    TrueEffects truth;
};

/// Exactly floor(n/2) units are treated, chosen by a seeded permutation.
/// Truth comes from the type mixture, or from a `truth_units` simulation when
/// the shocks are serially correlated (left empty when truth_units is 0).
SimulatedSample simulate(const DgpSpec& dgp, int n, std::uint64_t seed, long truth_units = 10'000'000);

SimulatedSample simulate_duration_model(const DurationDgpParams& p, int n, std::uint64_t seed,
                                        long truth_units = 10'000'000);
SimulatedSample simulate_job_search(const JobSearchParams& p, int n, std::uint64_t seed);

/// Potential paths only, without assignment; used for the auxiliary truth
/// and the path-based checkers.
std::vector<PotentialPaths> draw_paths(const DgpSpec& dgp, long n, std::uint64_t seed);

/// Population estimands of a DGP: exact from the type mixture when one
/// exists, otherwise from `truth_units` simulated units (flagged).
TrueEffects dgp_true_effects(const DgpSpec& dgp, long truth_units = 10'000'000);

/// Estimands computed directly from simulated potential paths.
TrueEffects effects_from_paths(const std::vector<PotentialPaths>& paths, int t_max);

/// The PCO inequalities evaluated on sample frequencies; differences within
/// `tol` count as satisfied.
bool check_pco_paths(const std::vector<PotentialPaths>& paths, int t_max, double tol);

/// Common shocks on paths: in every period, survival in the arm favoured by
/// the unit's effect sign is implied by survival in the other arm.
bool check_cs_paths(const std::vector<PotentialPaths>& paths, int t_max);

}  // namespace tebounds
