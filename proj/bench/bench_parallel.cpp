// Serial reference vs OpenMP kernels: bootstrap resampling and coverage replications.

#include "tebounds/coverage.hpp"
#include "tebounds/dgp_config.hpp"
#include "tebounds/infer.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

using namespace tebounds;

namespace {

double seconds(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-28s serial %8.3f s  parallel %8.3f s  speedup %5.2fx  identical=%s\n", name, serial, parallel,
                serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 20000;
    const int B = argc > 2 ? std::atoi(argv[2]) : 999;
    const int reps = argc > 3 ? std::atoi(argv[3]) : 100;
    std::printf("threads: %d, n = %d, B = %d, coverage reps = %d\n", omp_get_max_threads(), n, B, reps);

    const auto dgp = preset_dgp("null-shared");
    const auto sample = simulate(dgp, n, 7, 0);
    const int t_max = sample.data.t_max();

    std::vector<LifeTableCounts> cs, cp;
    const double s1 = seconds([&] { cs = bootstrap_counts(sample.data, t_max, B, 11, Execution::Serial); });
    const double p1 = seconds([&] { cp = bootstrap_counts(sample.data, t_max, B, 11, Execution::Parallel); });
    bool same = cs.size() == cp.size();
    for (std::size_t r = 0; same && r < cs.size(); ++r) {
        same = cs[r].events == cp[r].events && cs[r].censored == cp[r].censored && cs[r].n == cp[r].n;
    }
    report("bootstrap resampling", s1, p1, same);

    CoverageConfig cfg;
    cfg.dgp = dgp;
    cfg.n = 2000;
    cfg.reps = reps;
    cfg.bootstrap = 199;
    cfg.seed = 3;
    cfg.regimes = {{Regime::NoAssumption, MtrSign::Unknown}, {Regime::MtrCsPco, MtrSign::Unknown}};
    CoverageReport rs, rp;
    cfg.exec = Execution::Serial;
    const double s2 = seconds([&] { rs = coverage_study(cfg); });
    cfg.exec = Execution::Parallel;
    const double p2 = seconds([&] { rp = coverage_study(cfg); });
    report("coverage replications", s2, p2, coverage_json(rs).substr(coverage_json(rs).find("\"cells\"")) ==
                                                coverage_json(rp).substr(coverage_json(rp).find("\"cells\"")));
    return same ? 0 : 1;
}
