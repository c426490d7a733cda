#include "support.hpp"

#include "tebounds/bounds.hpp"
#include "tebounds/error.hpp"
#include "tebounds/oracle.hpp"
#include "tebounds/simplex.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace tebounds;

namespace {

JointOutcomeTable random_table(testsupport::Rng& rng) {
    JointOutcomeTable jt;
    double total = 0.0;
    for (auto& p : jt.p) {
        // Sparse draws hit the polytope's faces.
        p = rng.chance(0.3) ? 0.0 : -std::log(rng.uniform(1e-12, 1.0));
        total += p;
    }
    if (total == 0.0) {
        jt.p[0] = 1.0;
        total = 1.0;
    }
    for (auto& p : jt.p) p /= total;
    return jt;
}

double treated_stay1(const JointOutcomeTable& jt) {
    double s = 0.0;
    for (int d2 = 0; d2 <= 1; ++d2)
        for (int d3 = 0; d3 <= 1; ++d3)
            for (int d4 = 0; d4 <= 1; ++d4) s += jt(0, d2, d3, d4);
    return s;
}

}  // namespace

TEST_CASE("simplex on small programs") {
    auto r = simplex_minimize({{1, 1}}, {1}, {1, 2});
    REQUIRE(r.status == LpResult::Status::Optimal);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.x[0] == doctest::Approx(1.0));

    CHECK(simplex_minimize({{1, 1}}, {-1}, {1, 1}).status == LpResult::Status::Infeasible);
    CHECK(simplex_minimize({{1, -1}}, {0}, {-1, 0}).status == LpResult::Status::Unbounded);

    // A repeated row is redundant, not infeasible.
    r = simplex_minimize({{1, 1, 0}, {1, 1, 0}, {0, 1, 1}}, {2, 2, 3}, {1, 0, 1});
    REQUIRE(r.status == LpResult::Status::Optimal);
    CHECK(r.value == doctest::Approx(1.0));
}

TEST_CASE("simplex terminates on a cycling-prone degenerate program") {
    // Beale's example; naive largest-coefficient pivoting cycles here.
    const std::vector<std::vector<double>> A{
        {1, 0, 0, 0.25, -8, -1, 9},
        {0, 1, 0, 0.5, -12, -0.5, 3},
        {0, 0, 1, 0, 0, 1, 0},
    };
    const auto r = simplex_minimize(A, {0, 0, 1}, {0, 0, 0, -0.75, 20, -0.5, 6});
    REQUIRE(r.status == LpResult::Status::Optimal);
    CHECK(r.value == doctest::Approx(-1.25));
}

TEST_CASE("property: simplex solutions are feasible and beat a known point") {
    testsupport::Rng rng(123);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = rng.integer(1, 5), n = rng.integer(m, 9);
        std::vector<double> x0(static_cast<std::size_t>(n));
        for (auto& v : x0) v = rng.chance(0.3) ? 0.0 : rng.uniform(0, 2);
        std::vector<std::vector<double>> A(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(n)));
        std::vector<double> b(static_cast<std::size_t>(m), 0.0), c(static_cast<std::size_t>(n));
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) {
                A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rng.uniform(-1, 1);
                b[static_cast<std::size_t>(i)] += A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * x0[static_cast<std::size_t>(j)];
            }
        }
        for (auto& v : c) v = rng.uniform(0, 1);  // nonnegative costs: bounded below by 0
        const auto r = simplex_minimize(A, b, c);
        REQUIRE(r.status == LpResult::Status::Optimal);
        CHECK(r.value <= std::inner_product(c.begin(), c.end(), x0.begin(), 0.0) + 1e-9);
        for (int i = 0; i < m; ++i) {
            const auto& row = A[static_cast<std::size_t>(i)];
            CHECK(std::inner_product(row.begin(), row.end(), r.x.begin(), 0.0) ==
                  doctest::Approx(b[static_cast<std::size_t>(i)]).epsilon(1e-8).scale(1.0));
        }
        for (double v : r.x) CHECK(v >= -1e-12);
    }
}

TEST_CASE("joint-outcome LP on the reference margins") {
    const auto lp = lp_counterfactual_bounds_t2(margins_from_hazards(0.2, 0.3, 0.1, 0.25));
    CHECK(lp.lo == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(lp.hi == doctest::Approx(0.40625).epsilon(1e-12));

    const auto est = ArmEstimates::from_hazards(std::vector<double>{0.2, 0.3}, std::vector<double>{0.1, 0.25});
    const auto cf = counterfactual_interval(est, 2);
    REQUIRE(cf.has_value());
    CHECK(cf->lo == doctest::Approx(lp.lo).epsilon(1e-12));
    CHECK(cf->hi == doctest::Approx(lp.hi).epsilon(1e-12));
}

TEST_CASE("joint-outcome LP preconditions and symmetric margins") {
    CHECK_THROWS_AS(lp_counterfactual_bounds_t2(margins_from_hazards(1.0, 0.3, 1.0, 0.2)), Error);
    const auto lp = lp_counterfactual_bounds_t2(margins_from_hazards(0.3, 0.4, 0.3, 0.4));
    CHECK(lp.lo <= 0.4);
    CHECK(lp.hi >= 0.4);
}

TEST_CASE("exact effects of simple tables") {
    JointOutcomeTable point;
    point.p[JointOutcomeTable::index(0, 1, 0, 0)] = 1.0;
    const auto e = exact_effects(point);
    REQUIRE(e.atets2.has_value());
    CHECK(*e.atets2 == 1.0);

    // No effect: both potential paths coincide.
    JointOutcomeTable same;
    same.p[JointOutcomeTable::index(0, 0, 0, 0)] = 0.5;
    same.p[JointOutcomeTable::index(0, 1, 0, 1)] = 0.2;
    same.p[JointOutcomeTable::index(1, 0, 1, 0)] = 0.3;
    CHECK(*exact_effects(same).atets2 == 0.0);
    CHECK(*exact_effects(same).ates2 == 0.0);
}

TEST_CASE("absorbing destinations") {
    JointOutcomeTable single;
    single.p[JointOutcomeTable::index(1, 0, 0, 1)] = 0.4;
    single.p[JointOutcomeTable::index(0, 0, 1, 0)] = 0.6;
    CHECK(absorbing_check(single));

    JointOutcomeTable repeat = single;
    repeat.p[JointOutcomeTable::index(1, 0, 0, 1)] = 0.3;
    repeat.p[JointOutcomeTable::index(1, 1, 0, 0)] = 0.1;
    CHECK_FALSE(absorbing_check(repeat));
}

TEST_CASE("property: the true effect of a random table lies inside the LP and closed-form bounds") {
    testsupport::Rng rng(4242);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto jt = random_table(rng);
        if (treated_stay1(jt) <= 1e-9) continue;
        const auto m = margins_of(jt);
        const auto truth = exact_effects(jt);
        REQUIRE(truth.atets2.has_value());
        const auto lp = lp_counterfactual_bounds_t2(m);
        const double h1 = m.arm[1].exit2 / (m.arm[1].exit2 + m.arm[1].stay);
        CHECK(*truth.atets2 >= h1 - lp.hi - 1e-9);
        CHECK(*truth.atets2 <= h1 - lp.lo + 1e-9);
        const auto b = bounds_no_assumption(estimates_from_margins(m), 2);
        CHECK(*truth.atets2 >= b.lb - 1e-9);
        CHECK(*truth.atets2 <= b.ub + 1e-9);
        ++checked;
    }
    CHECK(checked > 9000);
}

TEST_CASE("survivor-conditional LP confirms the survivor effect bounds") {
    const auto m = margins_from_hazards(0.2, 0.3, 0.1, 0.25);
    const auto means = lp_survivor_means_t2(m);
    const double lo = means.treated.lo - means.control.hi;
    const double hi = means.treated.hi - means.control.lo;
    CHECK(lo == doctest::Approx(-0.1214285714285714).epsilon(1e-9));
    CHECK(hi == doctest::Approx(0.3071428571428571).epsilon(1e-9));
    const auto b = bounds_ates(estimates_from_margins(m), 2);
    CHECK(b.lb == doctest::Approx(lo).epsilon(1e-9));
    CHECK(b.ub == doctest::Approx(hi).epsilon(1e-9));
}

TEST_CASE("property: survivor LP agrees with the closed form whenever defined") {
    testsupport::Rng rng(808);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const double a = rng.uniform(0, 0.6), b = rng.uniform(0, 0.6);
        const double c = rng.probability(), d = rng.probability();
        const auto m = margins_from_hazards(a, c, b, d);
        const auto bounds = bounds_ates(estimates_from_margins(m), 2);
        if (bounds.undefined) continue;
        const auto means = lp_survivor_means_t2(m);
        CHECK(bounds.lb == doctest::Approx(means.treated.lo - means.control.hi).epsilon(1e-9));
        CHECK(bounds.ub == doctest::Approx(means.treated.hi - means.control.lo).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("three-period LP matches the closed form") {
    const auto s = oracle_check(300, 99, 3);
    CHECK(s.matches == s.trials);
    CHECK(s.max_abs_diff <= 1e-9);
}

TEST_CASE("two-period oracle summary") {
    const auto s = oracle_check(2000, 7);
    CHECK(s.trials == 2000);
    CHECK(s.matches == 2000);
}
