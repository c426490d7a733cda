// Command-line front end: bounds, ci, simulate, coverage, oracle-check.

#include "tebounds/coverage.hpp"
#include "tebounds/dgp_config.hpp"
#include "tebounds/error.hpp"
#include "tebounds/oracle.hpp"
#include "tebounds/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace tebounds;

namespace {

struct Options {
    std::string input;
    int bin_width = 1;
    int t_max = 0;
    int k = 1;
    std::string regimes = "none,mtr-cs,pco,mtr-cs-pco";
    double alpha = 0.05;
    double alpha_pre = 0.001;
    int bootstrap = 399;
    std::uint64_t seed = 20240601;
    std::string format = "table";
    std::string subgroup;
    std::string mtr_sign = "unknown";
    bool ates = false;
    bool simulated_critical = false;
    // simulate / coverage
    std::string dgp = "preset:null-shared";
    int n = 2000;
    int reps = 500;
    bool population = false;
    std::string out;
    // oracle-check
    int trials = 10000;
    bool t3 = false;
};

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::vector<Regime> parse_regimes(const Options& o) {
    std::vector<Regime> out;
    for (const auto& name : split(o.regimes)) {
        const auto r = parse_regime(name);
        if (!r) throw Error(ErrorCode::Usage, "unknown regime '" + name + "'");
        out.push_back(*r);
    }
    if (o.ates) out.push_back(Regime::Ates);
    if (out.empty()) throw Error(ErrorCode::Usage, "no regimes selected");
    return out;
}

MtrSign resolve_sign(const Options& o, const ArmEstimates& est) {
    if (o.mtr_sign == "unknown") return MtrSign::Unknown;
    if (o.mtr_sign == "nonneg") return MtrSign::NonNegative;
    if (o.mtr_sign == "nonpos") return MtrSign::NonPositive;
    return auto_mtr_sign(est, o.alpha);
}

std::vector<AssumptionRegime> with_sign(const std::vector<Regime>& tags, MtrSign sign) {
    std::vector<AssumptionRegime> out;
    for (auto tag : tags) {
        AssumptionRegime r{tag, MtrSign::Unknown};
        if (r.uses_sign()) r.sign = sign;
        out.push_back(r);
    }
    return out;
}

PanelDataset load_dataset(const Options& o) {
    std::ifstream in(o.input);
    if (!in) throw Error(ErrorCode::Io, "cannot open input " + o.input);
    auto ds = parse_compact_csv(in);
    if (o.bin_width != 1) ds = bin_periods(ds, o.bin_width);
    if (!o.subgroup.empty()) {
        std::ifstream sf(o.subgroup);
        if (!sf) throw Error(ErrorCode::Io, "cannot open subgroup file " + o.subgroup);
        const auto ids = read_id_list(sf);
        const std::set<std::string, std::less<>> keep(ids.begin(), ids.end());
        ds = filter_subgroup(ds, [&](std::string_view id) { return keep.count(id) != 0; });
    }
    return ds;
}

void emit(const RunRecord& run, const std::string& format) {
    if (format == "json") {
        std::cout << render_json(run);
    } else if (format == "csv") {
        std::cout << render_csv(run);
    } else {
        std::cout << render_table(run);
    }
}

int run_analysis(const Options& o, bool with_ci) {
    const auto tags = parse_regimes(o);
    auto ds = load_dataset(o);
    if (o.k > 1) ds = restrict_to_start(ds, o.k);
    ds.require_both_arms();
    const int horizon = o.t_max > 0 ? o.t_max : ds.t_max();
    if (o.t_max > 0 && o.t_max != ds.t_max()) ds = with_horizon(ds, horizon);
    const auto est = arm_estimates(ds, horizon);

    AnalysisConfig cfg;
    cfg.t_max = horizon;
    cfg.regimes = with_sign(tags, resolve_sign(o, est));
    cfg.with_ci = with_ci;
    cfg.alpha = o.alpha;
    cfg.alpha_pre = o.alpha_pre;
    cfg.bootstrap = o.bootstrap;
    cfg.seed = o.seed;
    cfg.simulated_critical = o.simulated_critical;

    RunRecord run;
    run.info = {with_ci ? "ci" : "bounds", o.input, o.bin_width, horizon, o.k, o.alpha, o.alpha_pre,
                o.bootstrap, o.seed, o.mtr_sign, with_ci, o.simulated_critical, o.subgroup};
    run.est = est;
    run.rows = analyze(ds, est, cfg);
    emit(run, o.format);
    return has_row_errors(run) ? 1 : 0;
}

int run_simulate(const Options& o) {
    const auto dgp = load_dgp(o.dgp);
    const auto sample = simulate(dgp, o.n, o.seed);
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + o.out);
        f << to_compact_csv(sample.data);
    }
    const int horizon = o.t_max > 0 ? std::min(o.t_max, sample.data.t_max()) : sample.data.t_max();
    const auto est = arm_estimates(sample.data, horizon);

    AnalysisConfig cfg;
    cfg.t_max = horizon;
    cfg.regimes = with_sign(parse_regimes(o), resolve_sign(o, est));
    cfg.alpha = o.alpha;
    cfg.alpha_pre = o.alpha_pre;
    cfg.bootstrap = o.bootstrap;
    cfg.seed = o.seed;
    cfg.simulated_critical = o.simulated_critical;

    RunRecord run;
    run.info = {"simulate", o.dgp, 1, horizon, 1, o.alpha, o.alpha_pre, o.bootstrap, o.seed, o.mtr_sign, true,
                o.simulated_critical, ""};
    run.est = est;
    run.rows = analyze(sample.data, est, cfg);
    run.truth = sample.truth;
    emit(run, o.format);
    return has_row_errors(run) ? 1 : 0;
}

int run_coverage(const Options& o) {
    CoverageConfig cfg;
    cfg.dgp = load_dgp(o.dgp);
    cfg.n = o.n;
    cfg.reps = o.reps;
    cfg.alpha = o.alpha;
    cfg.alpha_pre = o.alpha_pre;
    cfg.bootstrap = o.bootstrap;
    cfg.seed = o.seed;
    cfg.t_max = o.t_max;
    cfg.population_mode = o.population;
    cfg.simulated_critical = o.simulated_critical;
    const auto sign = o.mtr_sign == "nonneg"   ? MtrSign::NonNegative
                      : o.mtr_sign == "nonpos" ? MtrSign::NonPositive
                                               : MtrSign::Unknown;
    if (o.mtr_sign == "auto") throw Error(ErrorCode::Usage, "coverage takes a fixed --mtr-sign");
    cfg.regimes = with_sign(parse_regimes(o), sign);
    const auto report = coverage_study(cfg);

    if (o.format == "table") {
        std::printf("%4s  %-12s %9s %10s %10s %10s\n", "t", "regime", "truth", "ci_cover", "bnd_cover", "threshold");
        for (const auto& c : report.cells) {
            std::printf("%4d  %-12s %9s %10.3f %10.3f %10.3f\n", c.t, std::string(regime_name(c.regime.tag)).c_str(),
                        c.truth ? std::to_string(*c.truth).substr(0, 9).c_str() : "n.d.", c.ci_coverage,
                        c.bounds_coverage, c.threshold);
        }
    } else {
        std::cout << coverage_json(report);
    }
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + o.out);
        f << coverage_json(report);
    }
    return 0;
}

int run_oracle_check(const Options& o) {
    const auto s = oracle_check(o.trials, o.seed, o.t3 ? 3 : 2);
    std::cout << s.matches << "/" << s.trials << " match";
    if (s.matches != s.trials) std::cout << " (max abs diff " << s.max_abs_diff << ")";
    std::cout << "\n";
    return s.matches == s.trials ? 0 : 1;
}

void add_data_flags(CLI::App* app, Options& o) {
    app->add_option("--input", o.input, "compact CSV: id,arm,duration,event[,treat_start]")->required();
    app->add_option("--bin-width", o.bin_width, "raw periods per analysis period")->check(CLI::PositiveNumber);
    app->add_option("--k", o.k, "period in which treatment starts")->check(CLI::PositiveNumber);
    app->add_option("--subgroup", o.subgroup, "file of ids to keep, one per line");
}

void add_common_flags(CLI::App* app, Options& o) {
    app->add_option("--t-max", o.t_max, "analysis horizon (default: data horizon)")->check(CLI::NonNegativeNumber);
    app->add_option("--regimes", o.regimes, "comma list of none, mtr-cs, pco, mtr-cs-pco, ates");
    app->add_flag("--ates", o.ates, "add the survivor-average effect");
    app->add_option("--mtr-sign", o.mtr_sign, "sign refinement for MTR regimes")
        ->check(CLI::IsMember({"unknown", "nonneg", "nonpos", "auto"}));
    app->add_option("--alpha", o.alpha, "confidence level 1 - alpha")->check(CLI::Range(1e-6, 0.4999));
    app->add_option("--format", o.format, "output format")->check(CLI::IsMember({"table", "json", "csv"}));
    app->add_option("--seed", o.seed, "random seed");
}

void add_ci_flags(CLI::App* app, Options& o) {
    app->add_option("--alpha-pre", o.alpha_pre, "pretest size")->check(CLI::Range(1e-9, 0.5));
    app->add_option("--bootstrap", o.bootstrap, "bootstrap replications")->check(CLI::Range(2, 1000000));
    app->add_flag("--simulated-critical", o.simulated_critical, "simulate critical values instead of Bonferroni");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounds and confidence intervals for dynamic treatment effects on transition probabilities"};
    app.require_subcommand(1);
    Options o;

    auto* bounds = app.add_subcommand("bounds", "plug-in bounds for every period and regime");
    add_data_flags(bounds, o);
    add_common_flags(bounds, o);

    auto* ci = app.add_subcommand("ci", "bounds with moment-inequality confidence intervals");
    add_data_flags(ci, o);
    add_common_flags(ci, o);
    add_ci_flags(ci, o);

    auto* sim = app.add_subcommand("simulate", "simulate a DGP and analyse the sample");
    sim->add_option("--dgp", o.dgp, "DGP file or preset:<name>");
    sim->add_option("--n", o.n, "sample size")->check(CLI::Range(2, 100000000));
    sim->add_option("--out", o.out, "also write the simulated sample as CSV");
    add_common_flags(sim, o);
    add_ci_flags(sim, o);

    auto* cov = app.add_subcommand("coverage", "Monte Carlo coverage of bounds and intervals");
    cov->add_option("--dgp", o.dgp, "DGP file or preset:<name>");
    cov->add_option("--n", o.n, "sample size")->check(CLI::Range(2, 100000000));
    cov->add_option("--reps", o.reps, "replications")->check(CLI::PositiveNumber);
    cov->add_flag("--population", o.population, "exact population bounds, no sampling");
    cov->add_option("--out", o.out, "also write the JSON report to a file");
    add_common_flags(cov, o);
    add_ci_flags(cov, o);
    o.format = "table";

    auto* oracle = app.add_subcommand("oracle-check", "LP oracle against the closed-form interval");
    oracle->add_option("--trials", o.trials, "random margin vectors")->check(CLI::PositiveNumber);
    oracle->add_option("--seed", o.seed, "random seed");
    oracle->add_flag("--t3", o.t3, "use the three-period polytope");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cout << error_json(ErrorCode::Usage, e.what());
        return 2;
    }

    try {
        if (*bounds) return run_analysis(o, false);
        if (*ci) return run_analysis(o, true);
        if (*sim) return run_simulate(o);
        if (*cov) return run_coverage(o);
        if (*oracle) return run_oracle_check(o);
    } catch (const Error& e) {
        std::cout << error_json(e.code(), e.what(), e.line());
        return 2;
    } catch (const std::exception& e) {
        std::cout << error_json(ErrorCode::Io, e.what());
        return 2;
    }
    return 2;
}
