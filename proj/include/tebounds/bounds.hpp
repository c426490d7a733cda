#pragma once

#include "tebounds/estimate.hpp"

#include <optional>
#include <string_view>

namespace tebounds {

enum class Regime { NoAssumption, MtrCs, Pco, MtrCsPco, Ates };
enum class MtrSign { Unknown, NonNegative, NonPositive };

struct AssumptionRegime {
    Regime tag = Regime::NoAssumption;
    MtrSign sign = MtrSign::Unknown;  // only meaningful for MtrCs and MtrCsPco

    bool uses_sign() const { return tag == Regime::MtrCs || tag == Regime::MtrCsPco; }
    friend bool operator==(const AssumptionRegime&, const AssumptionRegime&) = default;
};

std::string_view regime_name(Regime r);        // none, mtr-cs, pco, mtr-cs-pco, ates
std::optional<Regime> parse_regime(std::string_view name);
std::string_view sign_name(MtrSign s);         // unknown, nonneg, nonpos

/// Why a bound could not be evaluated.
///   NotDefined  - the estimand itself is undefined (no treated survivors, or
///                 no joint survivors for the survivor effect)
///   MissingData - survivors exist but a needed risk set is empty (censoring)
enum class Definedness { Defined, NotDefined, MissingData };

struct BoundsResult {
    int t = 1;
    AssumptionRegime regime;
    double lb = 0.0;
    double ub = 0.0;
    bool point_identified = false;
    bool undefined = false;
    Definedness status = Definedness::Defined;
    bool degenerate = false;  // trivial [h1-1, h1] branch
    bool empty = false;       // sign refinement contradicts the data (lb > ub)
    double width = 0.0;
    std::optional<double> analytic_width;  // NoAssumption only, when no clamp binds
};

/// Interval for the counterfactual mean E(Y_t^0 | treated survivors) under
/// random assignment alone; the treatment-effect bounds are h1(t) minus it.
struct CounterfactualInterval {
    double lo = 0.0;
    double hi = 1.0;
};
std::optional<CounterfactualInterval> counterfactual_interval(const ArmEstimates& est, int t);

BoundsResult bounds_no_assumption(const ArmEstimates& est, int t);
BoundsResult bounds_mtr_cs(const ArmEstimates& est, int t, MtrSign sign = MtrSign::Unknown);
BoundsResult bounds_pco(const ArmEstimates& est, int t);
BoundsResult bounds_mtr_cs_pco(const ArmEstimates& est, int t, MtrSign sign = MtrSign::Unknown);
BoundsResult bounds_ates(const ArmEstimates& est, int t);

BoundsResult compute_bounds(const ArmEstimates& est, int t, AssumptionRegime regime);

double width(const BoundsResult& b);

/// (2 - S1 - S0) / S1 at t-1: the width of the random-assignment bounds when
/// neither clamp binds.
double unclamped_width(const ArmEstimates& est, int t);

/// The identified quantities entering every bound at period t.
/// h0 is absent when no control unit survives to t (then J0 = S0 = 0).
struct PeriodInputs {
    double h1 = 0.0;
    double S1 = 0.0;  // treated survival through t-1
    double J1 = 0.0;
    double S0 = 0.0;  // control survival through t-1
    double J0 = 0.0;
    std::optional<double> h0;

    double min_survival() const { return S1 < S0 ? S1 : S0; }
};

/// Extracts the inputs at t for the treated-survivor effect.
Definedness period_inputs(const ArmEstimates& est, int t, PeriodInputs& out);

/// Product over s < t of [(1 - h1(s)) + (1 - h0(s)) - 1] used by the
/// positively-correlated-outcomes bounds.
struct SurvivalProduct {
    enum class Status { Positive, Degenerate, Missing } status = Status::Positive;
    double value = 1.0;
};
SurvivalProduct pco_survival_product(const ArmEstimates& est, int t);

}  // namespace tebounds
