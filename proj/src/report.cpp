#include "tebounds/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace tebounds {

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json number(const std::optional<double>& v) { return v ? number(*v) : ordered_json(nullptr); }

std::string_view status_name(Definedness d) {
    switch (d) {
        case Definedness::Defined: return "defined";
        case Definedness::NotDefined: return "not-defined";
        case Definedness::MissingData: return "missing-data";
    }
    return "defined";
}

std::string panel_title(const AssumptionRegime& r) {
    std::string title;
    switch (r.tag) {
        case Regime::NoAssumption: title = "No assumption bounds"; break;
        case Regime::MtrCs: title = "MTR+CS"; break;
        case Regime::Pco: title = "PCO"; break;
        case Regime::MtrCsPco: title = "MTR+CS+PCO"; break;
        case Regime::Ates: title = "ATES"; break;
    }
    if (r.uses_sign() && r.sign != MtrSign::Unknown) title += " (" + std::string(sign_name(r.sign)) + ")";
    return title;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    // Avoid printing "-0.000".
    if (std::string(buf) == "-0.000") return "0.000";
    return buf;
}

ordered_json row_json(const RowResult& row, const ArmEstimates& est) {
    const auto& b = row.bounds;
    ordered_json j;
    j["t"] = row.t;
    j["regime"] = std::string(regime_name(row.regime.tag));
    j["mtr_sign"] = std::string(sign_name(row.regime.sign));
    j["status"] = std::string(status_name(b.status));
    j["lb"] = number(b.lb);
    j["ub"] = number(b.ub);
    j["point_identified"] = b.point_identified;
    j["undefined"] = b.undefined;
    j["degenerate"] = b.degenerate;
    j["empty"] = b.empty;
    j["width"] = number(b.width);
    j["analytic_width"] = number(b.analytic_width);

    const auto t = static_cast<std::size_t>(row.t);
    ordered_json arms;
    for (int d = 1; d >= 0; --d) {
        const auto ud = static_cast<std::size_t>(d);
        ordered_json a;
        a["risk"] = est.risk[ud][t];
        a["events"] = est.events[ud][t];
        a["censored"] = est.censored[ud][t];
        a["hazard"] = est.defined(d, row.t) ? number(est.h(d, row.t)) : ordered_json(nullptr);
        a["survival_prev"] = number(est.S(d, row.t - 1));
        arms[d == 1 ? "treated" : "control"] = std::move(a);
    }
    j["arms"] = std::move(arms);

    if (row.avec) {
        ordered_json comps = ordered_json::array();
        for (std::size_t i = 0; i < row.avec->size(); ++i) {
            ordered_json c;
            c["side"] = row.avec->components[i].side == Side::Lower ? "lower" : "upper";
            c["constant"] = row.avec->components[i].constant;
            c["value"] = number(row.avec->values[i]);
            if (row.cov && row.cov->k == row.avec->size()) {
                c["se"] = number(std::sqrt(std::max(0.0, (*row.cov)(i, i)) / static_cast<double>(row.cov->n)));
            }
            if (row.ci) c["active"] = row.ci->pattern.active[i] != 0;
            comps.push_back(std::move(c));
        }
        j["a_vector"] = {{"layout", std::string(layout_name(row.avec->layout))}, {"components", std::move(comps)}};
    }
    if (row.cov) j["bootstrap"] = {{"replicates", row.cov->B}, {"dropped", row.cov->dropped}};
    if (row.ci) {
        const auto& p = row.ci->pattern;
        j["ci"] = {{"lo", number(row.ci->lo)},
                   {"hi", number(row.ci->hi)},
                   {"alpha", row.ci->alpha},
                   {"empty", row.ci->empty},
                   {"pattern",
                    {{"decoupled", p.decoupled},
                     {"decided_without_test", p.decided_without_test},
                     {"statistic", number(p.statistic)},
                     {"k_lower", p.k_lower},
                     {"k_upper", p.k_upper},
                     {"critical_lower", number(p.critical_lower)},
                     {"critical_upper", number(p.critical_upper)},
                     {"simulated", p.simulated}}}};
    }
    if (row.error) {
        j["error"] = {{"code", std::string(to_string(*row.error))}, {"message", row.error_message}};
    }
    return j;
}

}  // namespace

bool has_row_errors(const RunRecord& run) {
    for (const auto& r : run.rows) {
        if (r.error) return true;
    }
    return false;
}

std::string render_json(const RunRecord& run) {
    const auto& in = run.info;
    ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = in.command;
    j["config"] = {{"input", in.input},
                   {"bin_width", in.bin_width},
                   {"t_max", in.t_max},
                   {"k", in.k},
                   {"alpha", in.alpha},
                   {"alpha_pre", in.alpha_pre},
                   {"bootstrap", in.bootstrap},
                   {"seed", in.seed},
                   {"mtr_sign", in.mtr_sign_requested},
                   {"ci", in.with_ci},
                   {"simulated_critical", in.simulated_critical},
                   {"subgroup", in.subgroup}};
    j["sample"] = {{"n_treated", run.est.n[1]}, {"n_control", run.est.n[0]}};
    if (run.truth) {
        ordered_json atets = ordered_json::array(), ates = ordered_json::array();
        for (const auto& v : run.truth->atets) atets.push_back(number(v));
        for (const auto& v : run.truth->ates) ates.push_back(number(v));
        j["truth"] = {{"atets", std::move(atets)}, {"ates", std::move(ates)}, {"simulated", run.truth->simulated}};
    }
    ordered_json rows = ordered_json::array();
    for (const auto& r : run.rows) rows.push_back(row_json(r, run.est));
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string render_csv(const RunRecord& run) {
    std::ostringstream out;
    out.precision(17);
    out << "t,regime,mtr_sign,status,lower_ci,lb,ub,upper_ci,point_identified\n";
    auto cell = [&](double v) {
        if (std::isfinite(v)) out << v;
    };
    for (const auto& r : run.rows) {
        out << r.t << ',' << regime_name(r.regime.tag) << ',' << sign_name(r.regime.sign) << ','
            << (r.error ? std::string("error") : std::string(status_name(r.bounds.status))) << ',';
        if (r.ci) cell(r.ci->lo);
        out << ',';
        cell(r.bounds.lb);
        out << ',';
        cell(r.bounds.ub);
        out << ',';
        if (r.ci) cell(r.ci->hi);
        out << ',' << (r.bounds.point_identified ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string render_table(const RunRecord& run) {
    std::vector<AssumptionRegime> regimes;
    for (const auto& r : run.rows) {
        bool seen = false;
        for (const auto& g : regimes) seen = seen || g == r.regime;
        if (!seen) regimes.push_back(r.regime);
    }
    std::ostringstream out;
    out << "n treated = " << run.est.n[1] << ", n control = " << run.est.n[0];
    if (run.info.k != 1) out << ", treatment start k = " << run.info.k;
    out << '\n';
    char buf[160];
    for (std::size_t p = 0; p < regimes.size(); ++p) {
        out << '\n' << panel_title(regimes[p]) << " [" << static_cast<char>('A' + p) << "]\n";
        std::snprintf(buf, sizeof buf, "%4s  %9s %9s %9s %9s\n", "t", "Lower-CI", "LB", "UB", "Upper-CI");
        out << buf;
        for (const auto& r : run.rows) {
            if (!(r.regime == regimes[p])) continue;
            std::string lo = "", lb, ub, hi = "";
            if (r.error) {
                lb = ub = "error";
            } else if (r.bounds.undefined) {
                lb = ub = "n.d.";
            } else {
                lb = fixed3(r.bounds.lb);
                ub = fixed3(r.bounds.ub);
                if (r.ci) {
                    lo = fixed3(r.ci->lo);
                    hi = fixed3(r.ci->hi);
                }
            }
            std::snprintf(buf, sizeof buf, "%4d  %9s %9s %9s %9s%s\n", r.t, lo.c_str(), lb.c_str(), ub.c_str(),
                          hi.c_str(), r.bounds.empty ? "  (empty)" : "");
            out << buf;
        }
    }
    if (run.truth) {
        out << "\nTrue ATETS";
        if (run.truth->simulated) out << " (simulated)";
        out << ":";
        for (const auto& v : run.truth->atets) out << ' ' << (v ? fixed3(*v) : std::string("n.d."));
        out << '\n';
    }
    return out.str();
}

std::string error_json(ErrorCode code, const std::string& message, std::optional<std::size_t> line) {
    ordered_json j;
    j["schema_version"] = 1;
    j["error"] = {{"code", std::string(to_string(code))}, {"message", message}};
    if (line) j["error"]["line"] = *line;
    return j.dump() + "\n";
}

}  // namespace tebounds
