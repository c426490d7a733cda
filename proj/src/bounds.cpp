#include "tebounds/bounds.hpp"

#include "tebounds/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tebounds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BoundsResult make_undefined(int t, AssumptionRegime regime, Definedness why) {
    BoundsResult b;
    b.t = t;
    b.regime = regime;
    b.lb = kNaN;
    b.ub = kNaN;
    b.width = kNaN;
    b.undefined = true;
    b.status = why;
    return b;
}

BoundsResult make_interval(int t, AssumptionRegime regime, double lb, double ub) {
    BoundsResult b;
    b.t = t;
    b.regime = regime;
    b.lb = lb;
    b.ub = ub;
    b.empty = lb > ub;
    b.width = ub - lb;
    return b;
}

BoundsResult make_point(int t, AssumptionRegime regime, double value) {
    auto b = make_interval(t, regime, value, value);
    b.point_identified = true;
    b.width = 0.0;
    if (regime.tag == Regime::NoAssumption) b.analytic_width = 0.0;
    return b;
}

void check_period(const ArmEstimates& est, int t) {
    if (t < 1 || t > est.t_max) throw Error(ErrorCode::InvalidParams, "period out of range");
}

// Instantaneous effect (t = 1) or both survival fractions equal to one:
// the effect is point identified whatever the maintained assumptions.
bool point_identified_case(const PeriodInputs& in, int t) {
    return t == 1 || (in.S1 == 1.0 && in.S0 == 1.0);
}

// Gate shared by every treated-survivor regime; returns false with `out`
// filled in when the bound cannot be evaluated.
bool prepare(const ArmEstimates& est, int t, AssumptionRegime regime, PeriodInputs& in, BoundsResult& out) {
    check_period(est, t);
    const auto status = period_inputs(est, t, in);
    if (status != Definedness::Defined) {
        out = make_undefined(t, regime, status);
        return false;
    }
    if (point_identified_case(in, t)) {
        out = make_point(t, regime, in.h1 - *in.h0);
        return false;
    }
    return true;
}

}  // namespace

std::string_view regime_name(Regime r) {
    switch (r) {
        case Regime::NoAssumption: return "none";
        case Regime::MtrCs: return "mtr-cs";
        case Regime::Pco: return "pco";
        case Regime::MtrCsPco: return "mtr-cs-pco";
        case Regime::Ates: return "ates";
    }
    return "none";
}

std::optional<Regime> parse_regime(std::string_view name) {
    for (auto r : {Regime::NoAssumption, Regime::MtrCs, Regime::Pco, Regime::MtrCsPco, Regime::Ates}) {
        if (regime_name(r) == name) return r;
    }
    return std::nullopt;
}

std::string_view sign_name(MtrSign s) {
    switch (s) {
        case MtrSign::Unknown: return "unknown";
        case MtrSign::NonNegative: return "nonneg";
        case MtrSign::NonPositive: return "nonpos";
    }
    return "unknown";
}

Definedness period_inputs(const ArmEstimates& est, int t, PeriodInputs& out) {
    check_period(est, t);
    out = PeriodInputs{};
    out.S1 = est.S(1, t - 1);
    out.S0 = est.S(0, t - 1);
    if (out.S1 <= 0.0) return Definedness::NotDefined;
    if (!est.defined(1, t)) return Definedness::MissingData;
    out.h1 = est.h(1, t);
    out.J1 = est.J(1, t);
    if (out.S0 > 0.0) {
        if (!est.defined(0, t)) return Definedness::MissingData;
        out.h0 = est.h(0, t);
        out.J0 = est.J(0, t);
    } else {
        out.J0 = 0.0;
    }
    return Definedness::Defined;
}

SurvivalProduct pco_survival_product(const ArmEstimates& est, int t) {
    SurvivalProduct p;
    for (int s = 1; s < t; ++s) {
        if (est.S(1, s - 1) > 0.0 && !est.defined(1, s)) return {SurvivalProduct::Status::Missing, 0.0};
        if (est.S(0, s - 1) > 0.0 && !est.defined(0, s)) return {SurvivalProduct::Status::Missing, 0.0};
        // An arm with nobody left has no defined hazard; its factor is then
        // treated as a certain exit, which makes the product degenerate.
        const double stay1 = est.defined(1, s) ? 1.0 - est.h(1, s) : 0.0;
        const double stay0 = est.defined(0, s) ? 1.0 - est.h(0, s) : 0.0;
        const double factor = stay1 + stay0 - 1.0;
        if (factor <= 0.0) return {SurvivalProduct::Status::Degenerate, 0.0};
        p.value *= factor;
    }
    return p;
}

std::optional<CounterfactualInterval> counterfactual_interval(const ArmEstimates& est, int t) {
    PeriodInputs in;
    if (period_inputs(est, t, in) != Definedness::Defined) return std::nullopt;
    CounterfactualInterval cf;
    cf.lo = std::max(0.0, (in.J0 - 1.0) / in.S1 + 1.0);
    cf.hi = std::min(1.0, (1.0 - in.S0 + in.J0) / in.S1);
    return cf;
}

BoundsResult bounds_no_assumption(const ArmEstimates& est, int t) {
    const AssumptionRegime regime{Regime::NoAssumption, MtrSign::Unknown};
    PeriodInputs in;
    BoundsResult out;
    if (!prepare(est, t, regime, in, out)) return out;

    const double upper_raw = (1.0 - in.S0 + in.J0) / in.S1;
    const double lower_raw = (in.J0 - 1.0) / in.S1 + 1.0;
    out = make_interval(t, regime, in.h1 - std::min(1.0, upper_raw), in.h1 - std::max(0.0, lower_raw));
    if (upper_raw <= 1.0 && lower_raw >= 0.0) out.analytic_width = (2.0 - in.S1 - in.S0) / in.S1;
    return out;
}

BoundsResult bounds_mtr_cs(const ArmEstimates& est, int t, MtrSign sign) {
    const AssumptionRegime regime{Regime::MtrCs, sign};
    PeriodInputs in;
    BoundsResult out;
    if (!prepare(est, t, regime, in, out)) return out;

    const double m = in.min_survival();
    double lb = in.h1 - std::min(1.0, 1.0 + in.J0 / in.S1 - m / in.S1);
    double ub = in.h1 - std::max(0.0, (in.J0 - in.S0) / in.S1 + m / in.S1);
    // A known sign pins the joint survival probability to one arm's survival.
    if (sign == MtrSign::NonNegative) lb = std::max(0.0, in.h1 - in.J0 / in.S1);
    if (sign == MtrSign::NonPositive) ub = std::min(0.0, in.h1 - in.J0 / in.S1);
    return make_interval(t, regime, lb, ub);
}

BoundsResult bounds_pco(const ArmEstimates& est, int t) {
    const AssumptionRegime regime{Regime::Pco, MtrSign::Unknown};
    PeriodInputs in;
    BoundsResult out;
    if (!prepare(est, t, regime, in, out)) return out;

    const auto prod = pco_survival_product(est, t);
    if (prod.status == SurvivalProduct::Status::Missing) return make_undefined(t, regime, Definedness::MissingData);
    if (prod.status == SurvivalProduct::Status::Degenerate) {
        out = make_interval(t, regime, in.h1 - 1.0, in.h1);
        out.degenerate = true;
        return out;
    }
    const double pi = prod.value;
    const double lb = in.h1 - 1.0 + (1.0 - *in.h0) / in.S1 * pi;
    const double ub = in.h1 - std::max(0.0, (in.J0 - in.S0) / pi + 1.0);
    return make_interval(t, regime, lb, ub);
}

BoundsResult bounds_mtr_cs_pco(const ArmEstimates& est, int t, MtrSign sign) {
    const AssumptionRegime regime{Regime::MtrCsPco, sign};
    PeriodInputs in;
    BoundsResult out;
    if (!prepare(est, t, regime, in, out)) return out;

    const double m = in.min_survival();
    double lb = in.h1 - 1.0;
    double ub = in.h1;
    if (m > 0.0) {
        lb = in.h1 - 1.0 + (1.0 - *in.h0) / in.S1 * m;
        ub = in.h1 - std::max(0.0, (in.J0 - in.S0) / m + 1.0);
    }
    if (sign == MtrSign::NonNegative && in.h0) lb = std::max(0.0, in.h1 - *in.h0);
    if (sign == MtrSign::NonPositive && in.h0) ub = std::min(0.0, in.h1 - *in.h0);
    out = make_interval(t, regime, lb, ub);
    out.degenerate = m <= 0.0;
    return out;
}

BoundsResult bounds_ates(const ArmEstimates& est, int t) {
    const AssumptionRegime regime{Regime::Ates, MtrSign::Unknown};
    check_period(est, t);
    const double S1 = est.S(1, t - 1);
    const double S0 = est.S(0, t - 1);
    const double delta = S1 + S0 - 1.0;
    if (delta <= 0.0) return make_undefined(t, regime, Definedness::NotDefined);
    if (!est.defined(1, t) || !est.defined(0, t)) return make_undefined(t, regime, Definedness::MissingData);
    if (t == 1 || (S1 == 1.0 && S0 == 1.0)) return make_point(t, regime, est.h(1, t) - est.h(0, t));

    const double J1 = est.J(1, t);
    const double J0 = est.J(0, t);
    const double lb = std::max(0.0, (J1 + S0 - 1.0) / delta) - std::min(1.0, J0 / delta);
    const double ub = std::min(1.0, J1 / delta) - std::max(0.0, (J0 + S1 - 1.0) / delta);
    return make_interval(t, regime, lb, ub);
}

BoundsResult compute_bounds(const ArmEstimates& est, int t, AssumptionRegime regime) {
    switch (regime.tag) {
        case Regime::NoAssumption: return bounds_no_assumption(est, t);
        case Regime::MtrCs: return bounds_mtr_cs(est, t, regime.sign);
        case Regime::Pco: return bounds_pco(est, t);
        case Regime::MtrCsPco: return bounds_mtr_cs_pco(est, t, regime.sign);
        case Regime::Ates: return bounds_ates(est, t);
    }
    throw Error(ErrorCode::InvalidParams, "unknown regime");
}

double width(const BoundsResult& b) {
    if (b.undefined) throw Error(ErrorCode::Undefined, "width of undefined bounds");
    return b.ub - b.lb;
}

double unclamped_width(const ArmEstimates& est, int t) {
    check_period(est, t);
    const double S1 = est.S(1, t - 1);
    if (S1 <= 0.0) throw Error(ErrorCode::Undefined, "no treated survivors");
    return (2.0 - S1 - est.S(0, t - 1)) / S1;
}

}  // namespace tebounds
