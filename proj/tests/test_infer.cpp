#include "support.hpp"

#include "tebounds/data.hpp"
#include "tebounds/error.hpp"
#include "tebounds/infer.hpp"
#include "tebounds/normal.hpp"
#include "tebounds/simulate.hpp"
#include "tebounds/dgp_config.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace tebounds;
using testsupport::two_period;

namespace {

constexpr AssumptionRegime kNone{Regime::NoAssumption, MtrSign::Unknown};

AVector reference_avec() {
    AVector av;
    av.t = 2;
    av.regime = kNone;
    av.layout = ALayout::NoAssumption;
    av.values = {-0.7, -0.10625, 0.3, 0.26875};
    av.components = {{Side::Lower, false}, {Side::Lower, false}, {Side::Upper, false}, {Side::Upper, false}};
    return av;
}

CovMatrix diagonal(std::size_t k, double v, long n) {
    CovMatrix c;
    c.k = k;
    c.n = n;
    c.sigma.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) c.sigma[i * k + i] = v;
    return c;
}

PanelDataset null_sample(int n, std::uint64_t seed) { return simulate(preset_dgp("null-shared"), n, seed, 0).data; }

}  // namespace

TEST_CASE("normal quantile reference values") {
    CHECK(normal_quantile(0.9875) == doctest::Approx(2.241402727604945).epsilon(1e-13));
    CHECK(std::fabs(normal_quantile(0.9875) - 2.241) < 5e-4);
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
    CHECK(normal_quantile(0.999) == doctest::Approx(3.090232306167813).epsilon(1e-13));
    CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514727).epsilon(1e-13));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
    CHECK_THROWS_AS(normal_quantile(0.0), Error);
    CHECK_THROWS_AS(normal_quantile(1.0), Error);
}

TEST_CASE("property: quantile inverts the cdf") {
    testsupport::Rng rng(9);
    for (int i = 0; i < 2000; ++i) {
        const double p = rng.uniform(1e-12, 1.0 - 1e-12);
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
        CHECK(normal_quantile(1.0 - p) == doctest::Approx(-normal_quantile(p)).epsilon(1e-9));
    }
}

TEST_CASE("a-vector of the random-assignment bounds") {
    const auto av = a_vector(two_period(0.3, 0.25, 0.8, 0.9), 2, kNone);
    CHECK(av.layout == ALayout::NoAssumption);
    REQUIRE(av.size() == 4);
    CHECK(av.values[0] == doctest::Approx(-0.7).epsilon(1e-15));
    CHECK(av.values[1] == doctest::Approx(-0.10625).epsilon(1e-12));
    CHECK(av.values[2] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(av.values[3] == doctest::Approx(0.26875).epsilon(1e-12));

    const auto full = a_vector(two_period(0.3, 0.25, 1.0, 1.0), 2, kNone);
    CHECK(full.lower() == full.upper());
    CHECK_THROWS_AS(a_vector(two_period(0.3, 0.25, 0.4, 0.5), 2, {Regime::Ates, MtrSign::Unknown}), Error);
}

TEST_CASE("property: a-vector extremes reproduce the bounds exactly") {
    testsupport::Rng rng(31);
    const std::vector<AssumptionRegime> regimes{
        kNone,
        {Regime::MtrCs, MtrSign::Unknown},
        {Regime::MtrCs, MtrSign::NonNegative},
        {Regime::MtrCs, MtrSign::NonPositive},
        {Regime::Pco, MtrSign::Unknown},
        {Regime::MtrCsPco, MtrSign::Unknown},
        {Regime::MtrCsPco, MtrSign::NonNegative},
        {Regime::MtrCsPco, MtrSign::NonPositive},
        {Regime::Ates, MtrSign::Unknown},
    };
    int checked = 0;
    for (int i = 0; i < 4000; ++i) {
        const int t = rng.integer(1, 5);
        const auto est = testsupport::random_estimates(rng, t);
        for (const auto& r : regimes) {
            const auto b = compute_bounds(est, t, r);
            const auto layout = select_layout(est, t, r);
            CHECK(layout.has_value() == !b.undefined);
            if (b.undefined) continue;
            const auto av = a_vector(est, t, r);
            INFO("t=" << t << " regime=" << regime_name(r.tag) << " sign=" << sign_name(r.sign) << " layout=" << layout_name(av.layout));
            CHECK(av.lower() == doctest::Approx(b.lb).epsilon(1e-14));
            CHECK(av.upper() == doctest::Approx(b.ub).epsilon(1e-14));
            ++checked;
        }
    }
    CHECK(checked > 10000);
}

TEST_CASE("pretest separates distant bounds") {
    const auto av = reference_avec();
    const auto cov = diagonal(4, 0.5, 400);
    const auto p = pretest_decouple(av, cov, 0.05, 0.001);
    CHECK(p.statistic == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(p.decoupled);
    CHECK(p.active[0] == 0);  // far below the binding lower component
    CHECK(p.active[1] == 1);
    CHECK(p.k_lower == 1);
    CHECK(p.k_upper == 2);
    CHECK(p.critical_lower == doctest::Approx(1.6448536269514727).epsilon(1e-12));
    CHECK(p.critical_upper == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("pretest with coinciding bounds keeps the worst case") {
    auto av = reference_avec();
    av.values[1] = av.values[3] = 0.1;
    const auto p = pretest_decouple(av, diagonal(4, 0.5, 400), 0.05, 0.001);
    CHECK_FALSE(p.decoupled);
    CHECK(p.critical_lower == doctest::Approx(2.241402727604945).epsilon(1e-12));
    CHECK(p.critical_upper == p.critical_lower);
}

TEST_CASE("pretest without variance is decided by the point estimates") {
    const auto p = pretest_decouple(reference_avec(), diagonal(4, 0.0, 400), 0.05, 0.001);
    CHECK(p.decided_without_test);
    CHECK(p.decoupled);
    CHECK(std::isnan(p.statistic));
}

TEST_CASE("confidence interval assembly") {
    const auto av = reference_avec();
    const auto cov = diagonal(4, 1.0, 400);
    BindingPattern worst;
    worst.active.assign(4, 1);
    worst.critical_lower = worst.critical_upper = normal_quantile(1.0 - 0.05 / 4);
    const auto ci = confidence_interval(av, cov, 0.05, worst);
    CHECK(ci.lo == doctest::Approx(-0.21832).epsilon(1e-5));
    CHECK(ci.hi == doctest::Approx(0.38082).epsilon(1e-5));
    CHECK(std::fabs(ci.lo - (-0.21832)) < 1e-5);
    CHECK(std::fabs(ci.hi - 0.38082) < 1e-5);

    const auto zero = confidence_interval(av, diagonal(4, 0.0, 400), 0.05, worst);
    CHECK(zero.lo == av.lower());
    CHECK(zero.hi == av.upper());

    BindingPattern narrow = worst;
    narrow.critical_lower = narrow.critical_upper = normal_quantile(0.975);
    const auto tight = confidence_interval(av, cov, 0.05, narrow);
    CHECK(tight.lo > ci.lo);
    CHECK(tight.hi < ci.hi);
}

TEST_CASE("simulated critical value under independence") {
    std::vector<double> eye(16, 0.0);
    for (int i = 0; i < 4; ++i) eye[static_cast<std::size_t>(i * 5)] = 1.0;
    const double c = simulated_critical_value(eye, 4, 0.05, 200000, 17);
    // 0.95 quantile of the max of four independent normals.
    CHECK(c == doctest::Approx(2.234002475).epsilon(0.01));
    CHECK(c <= normal_quantile(1.0 - 0.05 / 4));

    std::vector<double> ones(16, 1.0);
    const double same = simulated_critical_value(ones, 4, 0.05, 200000, 17);
    CHECK(same == doctest::Approx(1.6448536269514727).epsilon(0.01));
    CHECK(simulated_critical_value(eye, 4, 0.05, 50000, 3) == simulated_critical_value(eye, 4, 0.05, 50000, 3));
}

TEST_CASE("bootstrap covariance is zero on a sample without variation") {
    std::ostringstream csv;
    csv << "id,arm,duration,event\n";
    for (int i = 0; i < 60; ++i) csv << "u" << i << "," << (i % 2) << ",3,1\n";
    const auto ds = parse_compact_csv(csv.str());
    const auto cov = bootstrap_cov(ds, 2, kNone, 99, 5);
    CHECK(cov.k == 4);
    for (double v : cov.sigma) CHECK(v == 0.0);
    CHECK(cov.dropped == 0);
}

TEST_CASE("bootstrap is deterministic and identical across execution modes") {
    const auto ds = null_sample(800, 42);
    const auto est = arm_estimates(ds, ds.t_max());
    std::vector<AVector> targets;
    for (int t = 1; t <= ds.t_max(); ++t) targets.push_back(a_vector(est, t, {Regime::MtrCsPco, MtrSign::Unknown}));
    const auto a = bootstrap_covariances(ds, ds.t_max(), targets, 199, 8, Execution::Parallel);
    const auto b = bootstrap_covariances(ds, ds.t_max(), targets, 199, 8, Execution::Parallel);
    const auto s = bootstrap_covariances(ds, ds.t_max(), targets, 199, 8, Execution::Serial);
    REQUIRE(a.size() == targets.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].sigma == b[i].sigma);
        CHECK(a[i].sigma == s[i].sigma);
        CHECK(a[i].dropped == s[i].dropped);
    }
    const auto other = bootstrap_covariances(ds, ds.t_max(), targets, 199, 9, Execution::Serial);
    CHECK(other[2].sigma != s[2].sigma);

    const auto cs = bootstrap_counts(ds, ds.t_max(), 50, 3, Execution::Serial);
    const auto cp = bootstrap_counts(ds, ds.t_max(), 50, 3, Execution::Parallel);
    for (std::size_t r = 0; r < cs.size(); ++r) {
        CHECK(cs[r].events == cp[r].events);
        CHECK(cs[r].censored == cp[r].censored);
        CHECK(cs[r].n[0] + cs[r].n[1] == static_cast<long>(ds.size()));
    }
}

TEST_CASE("bootstrap variance tracks the binomial variance of a hazard") {
    // Period-one hazards: n * var(h1 - h0) = h1(1-h1)/p1 + h0(1-h0)/p0 with p_d the arm shares.
    const auto ds = null_sample(4000, 11);
    const auto est = arm_estimates(ds, 1);
    const auto cov = bootstrap_cov(ds, 1, kNone, 999, 3);
    const double h1 = est.h(1, 1), h0 = est.h(0, 1);
    const double p1 = static_cast<double>(est.n[1]) / static_cast<double>(est.n[0] + est.n[1]);
    const double expected = h1 * (1 - h1) / p1 + h0 * (1 - h0) / (1 - p1);
    CHECK(cov(1, 1) == doctest::Approx(expected).epsilon(0.15));  // h1 - h0
}

TEST_CASE("automatic sign exclusion follows the period-one effect") {
    const std::vector<double> up1{0.6, 0.3}, up0{0.2, 0.3};
    auto est = ArmEstimates::from_hazards(up1, up0);
    est.risk[1][1] = est.risk[0][1] = 500;
    CHECK(auto_mtr_sign(est, 0.05) == MtrSign::NonNegative);
    auto down = ArmEstimates::from_hazards(up0, up1);
    down.risk[1][1] = down.risk[0][1] = 500;
    CHECK(auto_mtr_sign(down, 0.05) == MtrSign::NonPositive);
    const std::vector<double> flat{0.3, 0.3};
    auto none = ArmEstimates::from_hazards(flat, flat);
    none.risk[1][1] = none.risk[0][1] = 500;
    CHECK(auto_mtr_sign(none, 0.05) == MtrSign::Unknown);
}
