#include "tebounds/coverage.hpp"

#include "tebounds/dgp_config.hpp"
#include "tebounds/error.hpp"

#include <json.hpp>

#include <cmath>

namespace tebounds {

namespace {

std::uint64_t replication_seed(std::uint64_t seed, int r) {
    // splitmix64 step over (seed, r)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(r) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::optional<double> truth_for(const TrueEffects& te, int t, const AssumptionRegime& regime) {
    const auto& v = regime.tag == Regime::Ates ? te.ates : te.atets;
    return v.at(static_cast<std::size_t>(t - 1));
}

struct RepOutcome {
    std::vector<signed char> defined, ci_hit, bounds_hit, errored;
    std::vector<double> width;
};

}  // namespace

CoverageReport coverage_study(const CoverageConfig& cfg) {
    validate(cfg.dgp);
    const int T = cfg.t_max > 0 ? cfg.t_max : dgp_t_max(cfg.dgp);
    if (T > dgp_t_max(cfg.dgp)) throw Error(ErrorCode::InvalidParams, "t_max exceeds the DGP horizon");
    if (!cfg.population_mode && cfg.reps < 100) throw Error(ErrorCode::InvalidParams, "coverage needs reps >= 100");
    if (cfg.regimes.empty()) throw Error(ErrorCode::InvalidParams, "no regimes requested");

    CoverageReport rep;
    rep.config = cfg;
    rep.config.t_max = T;
    const auto truth = dgp_true_effects(cfg.dgp, cfg.truth_units);
    rep.truth_simulated = truth.simulated;

    const std::size_t ncell = static_cast<std::size_t>(T) * cfg.regimes.size();
    for (int t = 1; t <= T; ++t) {
        for (const auto& r : cfg.regimes) {
            CoverageCell c;
            c.t = t;
            c.regime = r;
            c.truth = truth_for(truth, t, r);
            rep.cells.push_back(c);
        }
    }

    if (cfg.population_mode) {
        const auto mix = type_mixture(cfg.dgp);
        if (!mix) throw Error(ErrorCode::InvalidParams, "population mode needs serially independent shocks");
        const auto rows = analyze_bounds(population_estimates(*mix), T, cfg.regimes);
        for (std::size_t i = 0; i < ncell; ++i) {
            auto& c = rep.cells[i];
            const auto& b = rows[i].bounds;
            if (b.undefined || !c.truth) continue;
            c.reps_defined = 1;
            c.bounds_covered = (*c.truth >= b.lb - 1e-12 && *c.truth <= b.ub + 1e-12) ? 1 : 0;
            c.bounds_coverage = c.bounds_covered;
        }
        return rep;
    }

    const auto R = static_cast<std::size_t>(cfg.reps);
    std::vector<RepOutcome> outcomes(R);
    auto run = [&](int r) {
        auto& out = outcomes[static_cast<std::size_t>(r)];
        out.defined.assign(ncell, 0);
        out.ci_hit.assign(ncell, 0);
        out.bounds_hit.assign(ncell, 0);
        out.errored.assign(ncell, 0);
        out.width.assign(ncell, 0.0);
        const auto sample = simulate(cfg.dgp, cfg.n, replication_seed(cfg.seed, r), 0);
        AnalysisConfig ac;
        ac.t_max = T;
        ac.regimes = cfg.regimes;
        ac.alpha = cfg.alpha;
        ac.alpha_pre = cfg.alpha_pre;
        ac.bootstrap = cfg.bootstrap;
        ac.seed = replication_seed(cfg.seed ^ 0xB007ULL, r);
        ac.simulated_critical = cfg.simulated_critical;
        ac.exec = Execution::Serial;
        std::vector<RowResult> rows;
        try {
            sample.data.require_both_arms();
            rows = analyze(sample.data, arm_estimates(sample.data, T), ac);
        } catch (const Error&) {
            for (auto& e : out.errored) e = 1;
            return;
        }
        for (std::size_t i = 0; i < ncell; ++i) {
            const auto& c = rep.cells[i];
            const auto& row = rows[i];
            if (!c.truth || row.bounds.undefined) continue;
            out.defined[i] = 1;
            const double th = *c.truth;
            out.bounds_hit[i] = th >= row.bounds.lb && th <= row.bounds.ub;
            if (!row.ci) {
                out.errored[i] = 1;
                continue;
            }
            out.ci_hit[i] = th >= row.ci->lo && th <= row.ci->hi;
            out.width[i] = row.ci->hi - row.ci->lo;
        }
    };
    if (cfg.exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < cfg.reps; ++r) run(r);
    } else {
        for (int r = 0; r < cfg.reps; ++r) run(r);
    }

    const double nominal = 1.0 - cfg.alpha;
    for (std::size_t i = 0; i < ncell; ++i) {
        auto& c = rep.cells[i];
        double width_sum = 0.0;
        for (const auto& o : outcomes) {
            c.reps_defined += o.defined[i] || o.errored[i];
            c.errors += o.errored[i];
            c.ci_covered += o.ci_hit[i];
            c.bounds_covered += o.bounds_hit[i];
            width_sum += o.width[i];
        }
        if (c.reps_defined == 0) continue;
        const double d = c.reps_defined;
        c.ci_coverage = c.ci_covered / d;
        c.bounds_coverage = c.bounds_covered / d;
        c.mcse = std::sqrt(nominal * (1.0 - nominal) / d);
        c.threshold = nominal - 3.0 * c.mcse;
        const int with_ci = c.reps_defined - c.errors;
        c.mean_ci_width = with_ci > 0 ? width_sum / with_ci : 0.0;
    }
    return rep;
}

std::string coverage_json(const CoverageReport& report) {
    using nlohmann::ordered_json;
    const auto& cfg = report.config;
    ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "coverage";
    j["config"] = {{"n", cfg.n},
                   {"reps", cfg.reps},
                   {"alpha", cfg.alpha},
                   {"alpha_pre", cfg.alpha_pre},
                   {"bootstrap", cfg.bootstrap},
                   {"seed", cfg.seed},
                   {"t_max", cfg.t_max},
                   {"population_mode", cfg.population_mode},
                   {"simulated_critical", cfg.simulated_critical},
                   {"dgp", to_dgp_config(cfg.dgp)}};
    j["truth_simulated"] = report.truth_simulated;
    ordered_json cells = ordered_json::array();
    for (const auto& c : report.cells) {
        ordered_json e;
        e["t"] = c.t;
        e["regime"] = std::string(regime_name(c.regime.tag));
        e["mtr_sign"] = std::string(sign_name(c.regime.sign));
        e["truth"] = c.truth ? ordered_json(*c.truth) : ordered_json(nullptr);
        e["reps_defined"] = c.reps_defined;
        e["errors"] = c.errors;
        e["ci_coverage"] = c.ci_coverage;
        e["bounds_coverage"] = c.bounds_coverage;
        e["mcse"] = c.mcse;
        e["threshold"] = c.threshold;
        e["mean_ci_width"] = c.mean_ci_width;
        cells.push_back(std::move(e));
    }
    j["cells"] = std::move(cells);
    return j.dump(2) + "\n";
}

}  // namespace tebounds
