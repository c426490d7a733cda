#pragma once

#include "tebounds/bounds.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace tebounds {

/// Which unclamped components make up the max/min structure of a bound.
enum class ALayout {
    Instantaneous,  // t = 1: random-assignment components, which coincide
    NoAssumption,
    MtrCs,
    MtrCsNonNeg,
    MtrCsNonPos,
    Pco,
    PcoDegenerate,
    MtrCsPco,
    MtrCsPcoNonNeg,
    MtrCsPcoNonPos,
    MtrCsPcoDegenerate,
    Ates,
};
std::string_view layout_name(ALayout layout);

enum class Side { Lower, Upper };

struct AComponent {
    Side side = Side::Lower;
    bool constant = false;  // a fixed clamp such as 0 or -1; never estimated
};

/// The lower bound is the max over Lower components and the upper bound the
/// min over Upper components.
struct AVector {
    int t = 1;
    AssumptionRegime regime;
    ALayout layout = ALayout::NoAssumption;
    std::vector<double> values;
    std::vector<AComponent> components;

    std::size_t size() const { return values.size(); }
    double lower() const;
    double upper() const;
};

/// The layout the point estimate at (t, regime) uses, or nullopt when the
/// bound is undefined there.
std::optional<ALayout> select_layout(const ArmEstimates& est, int t, AssumptionRegime regime);

/// Evaluates a given layout; nullopt when the layout cannot be evaluated on
/// these estimates (an undefined cell, a non-positive survival product, ...).
std::optional<AVector> evaluate_layout(const ArmEstimates& est, int t, AssumptionRegime regime, ALayout layout);

/// Throws Undefined when the bound is undefined at (t, regime).
AVector a_vector(const ArmEstimates& est, int t, AssumptionRegime regime);

/// n times the bootstrap covariance of the a-vector, row-major k x k.
struct CovMatrix {
    std::size_t k = 0;
    std::vector<double> sigma;
    long n = 0;
    int B = 0;
    std::uint64_t seed = 0;
    int dropped = 0;  // replicates where the layout could not be evaluated
    bool too_many_degenerate = false;

    double operator()(std::size_t i, std::size_t j) const { return sigma[i * k + j]; }
};

enum class Execution { Serial, Parallel };

/// Covariances for several a-vectors from one set of B resamples of the
/// pooled sample; each target keeps the layout of its point estimate.
/// Replicate r draws from a generator seeded by (seed, r), so the result does
/// not depend on the execution mode or the thread count.
std::vector<CovMatrix> bootstrap_covariances(const PanelDataset& ds, int t_max, const std::vector<AVector>& targets,
                                             int B, std::uint64_t seed, Execution exec = Execution::Parallel);

/// Single-target convenience; throws TooManyDegenerate when more than 10% of
/// the replicates are dropped.
CovMatrix bootstrap_cov(const PanelDataset& ds, int t, AssumptionRegime regime, int B, std::uint64_t seed,
                        Execution exec = Execution::Parallel);

/// Raw per-replicate life-table counts, exposed for the serial/parallel benchmark.
std::vector<LifeTableCounts> bootstrap_counts(const PanelDataset& ds, int t_max, int B, std::uint64_t seed,
                                              Execution exec);

struct BindingPattern {
    std::vector<char> active;  // per component
    bool decoupled = false;
    bool decided_without_test = false;  // zero standard error with lower != upper
    double statistic = 0.0;             // studentized upper - lower; NaN when untested
    int k_lower = 0;                    // active, non-constant components per side
    int k_upper = 0;
    double critical_lower = 0.0;
    double critical_upper = 0.0;
    bool simulated = false;
};

BindingPattern pretest_decouple(const AVector& av, const CovMatrix& cov, double alpha, double alpha_pre);

/// Replaces the Bonferroni critical values by the simulated (1 - alpha)
/// quantile of max_k [Z_k]_+ with Z ~ N(0, correlation of the active components).
/// When the pattern is decoupled each side is simulated separately.
void apply_simulated_critical(BindingPattern& pattern, const AVector& av, const CovMatrix& cov, double alpha,
                              int draws, std::uint64_t seed);

/// (1 - alpha) quantile of max_k [Z_k]_+, Z ~ N(0, corr) with corr k x k row-major.
double simulated_critical_value(const std::vector<double>& corr, std::size_t k, double alpha, int draws,
                                std::uint64_t seed);

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
    double alpha = 0.05;
    BindingPattern pattern;
    bool empty = false;  // lo > hi
};

ConfidenceInterval confidence_interval(const AVector& av, const CovMatrix& cov, double alpha,
                                       const BindingPattern& pattern);

/// One-sided test of the period-1 effect at level alpha: NonNegative when it
/// is significantly positive, NonPositive when significantly negative.
MtrSign auto_mtr_sign(const ArmEstimates& est, double alpha);

}  // namespace tebounds
