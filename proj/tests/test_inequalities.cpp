#include "doctest.h"

#include <cmath>
#include <limits>

#include "nfp/inequalities.hpp"
#include "nfp/solver.hpp"

using namespace nfp;

namespace {
constexpr double kPi = 3.14159265358979323846;
// int_0^inf dx/(1+x^(3/2)) = pi / ((3/2) sin(2 pi / 3)) = 4 pi / (3 sqrt 3)
const double kC10Unit = 4.0 * kPi / (3.0 * std::sqrt(3.0));
}  // namespace

TEST_SUITE_BEGIN("inequalities");

TEST_CASE("sobolev estimate dominates the affine closed form") {
    const GridSpec g = build_grid(1, {{0.0, 1.0}}, {256});
    // v = x - 1/2 on (0,1): ||v||_6 = (2 (1/2)^7 / 7)^(1/6), ||v'||_2 = 1.
    const double affine_ratio = std::pow(2.0 * std::pow(0.5, 7) / 7.0, 1.0 / 6.0);
    const double est = estimate_sobolev_constant(g, 6.0, 100, 7);
    CHECK(est >= affine_ratio);          // the affine field is in the trial prelude
    CHECK(est >= 1.5 * affine_ratio * 0.99);  // and the safety factor is applied
}

TEST_CASE("sobolev estimate is deterministic and monotone in trials") {
    const GridSpec g = build_grid(1, {{0.0, 1.0}}, {128});
    const double a = estimate_sobolev_constant(g, 6.0, 150, 42);
    const double b = estimate_sobolev_constant(g, 6.0, 150, 42);
    CHECK(a == b);
    const double c = estimate_sobolev_constant(g, 6.0, 300, 42);
    CHECK(c >= a);
    CHECK_THROWS_AS(estimate_sobolev_constant(g, 6.0, 50, 42), std::invalid_argument);
    CHECK_THROWS_AS(estimate_sobolev_constant(g, 1.0, 150, 42), std::invalid_argument);
}

TEST_CASE("interpolation constants follow the closing formulas") {
    const InterpConstants c = make_interp_constants(1.0, 1.0, 1.0, 6.0, 1.0);
    CHECK(c.c_s == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.c4 == doctest::Approx(3.0 * std::pow(2.0, -0.75)).epsilon(1e-14));
    CHECK(c.c5 == doctest::Approx(std::pow(2.0, -0.75)).epsilon(1e-14));
    CHECK(c.c6 == doctest::Approx(std::pow(2.0, 1.25)).epsilon(1e-14));

    const InterpConstants w = make_interp_constants(0.8, 0.5, 2.0, 6.0, 1.0);
    CHECK(w.c_s == doctest::Approx(std::pow(2.0, 1.0 / 6.0) * 0.8 / std::sqrt(0.5)).epsilon(1e-14));
    CHECK(w.c_s >= w.c_sob / std::sqrt(w.c2) * std::min(1.0, std::pow(w.c3, 1.0 / 6.0)));
    CHECK(w.c6 == doctest::Approx(std::pow(2.0, 1.25) * std::pow(2.0, 1.5)).epsilon(1e-14));
}

TEST_CASE("interpolation gap handles degenerate fields") {
    const GridSpec g = build_grid(1, {{0.0, 1.0}}, {64});
    const InterpConstants c = make_interp_constants(0.6, 0.5, 2.0, 6.0, 1.0);
    const ScalarField rho = ScalarField::constant(g, 1.0);  // unit mass on (0,1)
    {
        const InterpGap gap = interpolation_gap(ScalarField::constant(g, 0.0), rho, c);
        CHECK(gap.lhs == 0.0);
        CHECK(gap.rhs == 0.0);
    }
    {
        // Constant v: LHS = |v|^3, RHS >= c6 |v|^3 with c6 >= 2^(5/4).
        const InterpGap gap = interpolation_gap(ScalarField::constant(g, 2.0), rho, c);
        CHECK(gap.lhs == doctest::Approx(8.0).epsilon(1e-14));
        CHECK(gap.rhs >= c.c6 * 8.0 * (1 - 1e-14));
        CHECK(gap.lhs <= gap.rhs);
    }
}

TEST_CASE("sampled densities stay in range at unit mass") {
    const GridSpec g = build_grid(1, {{0.0, 1.0}}, {100});
    for (std::uint64_t i = 0; i < 10; ++i) {
        const ScalarField rho = detail::sample_density(g, 0.5, 2.0, 99, i);
        auto [lo, hi] = field_min_max(rho);
        CHECK(lo >= 0.5);
        CHECK(hi <= 2.0);
        CHECK(std::abs(sum_cells(rho) * g.cell_volume() - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(detail::sample_density(g, 2.0, 3.0, 1, 0), std::invalid_argument);
}

TEST_CASE("interpolation inequality holds on sampled fields") {
    const GridSpec g = build_grid(1, {{0.0, 1.0}}, {128});
    const double c_sob = estimate_sobolev_constant(g, 6.0, 200, 2024);
    const InterpConstants c = make_interp_constants(c_sob, 0.5, 2.0, 6.0, g.measure());
    const InterpReport rep = check_interpolation(g, 0.5, 2.0, c, 300, 555);
    CHECK(rep.violations == 0);
    CHECK(rep.max_ratio > 0.0);
    CHECK(rep.max_ratio <= 1.0);
}

TEST_CASE("undersized constants are detected and reclassified") {
    // Cripple the whole bundle: every sampled field must now violate,
    // and the tripled-c_sob recheck (which restores a full c6) clears
    // them, i.e. the report blames the constants rather than the
    // inequality machinery.
    const GridSpec g = build_grid(1, {{0.0, 1.0}}, {64});
    InterpConstants broken = make_interp_constants(1e-4, 0.5, 2.0, 6.0, g.measure());
    broken.c6 = 1e-4;
    const InterpReport rep = check_interpolation(g, 0.5, 2.0, broken, 50, 321);
    CHECK(rep.violations == 50);
    CHECK(rep.violations_at_safety3 == 0);
    CHECK(rep.max_ratio > 1.0);
}

TEST_CASE("interpolation inequality holds on a 2d grid") {
    const GridSpec g = build_grid(2, {{0.0, 1.0}, {0.0, 1.0}}, {24, 24});
    const double c_sob = estimate_sobolev_constant(g, 6.0, 150, 11);
    const InterpConstants c = make_interp_constants(c_sob, 0.5, 2.0, 6.0, g.measure());
    const InterpReport rep = check_interpolation(g, 0.5, 2.0, c, 150, 777);
    CHECK(rep.violations == 0);
}

TEST_CASE("threshold bundle reproduces the closed-form C10") {
    const GronwallParams p = gronwall_threshold(1.0, 1.0, 1.0);
    CHECK(std::abs(p.C10 - kC10Unit) <= 1e-10);
    CHECK(p.threshold == doctest::Approx(std::pow(kC10Unit / 2.0 + 1.0, -2.0)).epsilon(1e-10));
    CHECK(p.threshold == doctest::Approx(0.2049).epsilon(1e-3));
}

TEST_CASE("C10 follows the analytic scaling in C8 and C9") {
    // Closed form: C10 = C9^(1/3) / C8^(4/3) * 4 pi / (3 sqrt 3).
    for (const auto& [c8, c9] : {std::pair{1.0, 4.0}, {2.0, 1.0}, {0.7, 3.3}}) {
        const GronwallParams p = gronwall_threshold(1.0, c8, c9);
        const double closed = std::pow(c9, 1.0 / 3.0) / std::pow(c8, 4.0 / 3.0) * kC10Unit;
        CHECK(p.C10 == doctest::Approx(closed).epsilon(1e-10));
    }
}

TEST_CASE("degenerate coefficient handling") {
    CHECK(std::isinf(gronwall_threshold(2.0, 0.0, 0.0).threshold));
    CHECK(std::isinf(gronwall_threshold(2.0, 0.0, 5.0).threshold));
    const GronwallParams p = gronwall_threshold(1.0, 1.0, 0.0);  // no cubic term
    CHECK(p.C10 == 0.0);
    CHECK(p.threshold == doctest::Approx(1.0).epsilon(1e-12));  // (0 + 1)^-2
    CHECK_THROWS_AS(gronwall_threshold(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gronwall_threshold(1.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("linear case integrates to a pure exponential") {
    const GronwallParams p = gronwall_threshold(2.0, 0.0, 0.0);
    const GronwallReport rep = gronwall_verify(p, 1.0, 10.0, 1e-6);
    CHECK(rep.below_threshold);
    CHECK(rep.bound_holds);
    CHECK_FALSE(rep.blow_up);
    for (const auto& [t, g] : rep.samples)
        CHECK(g == doctest::Approx(std::exp(-2.0 * t)).epsilon(1e-8));
}

TEST_CASE("sub-threshold initial data obeys the decay bound") {
    const GronwallParams p = gronwall_threshold(1.0, 1.0, 1.0);
    const GronwallReport rep = gronwall_verify(p, 0.5 * p.threshold, 20.0, 1e-6);
    CHECK(rep.below_threshold);
    CHECK(rep.bound_holds);
    CHECK(rep.max_ratio <= 1.0 + 1e-6);
}

TEST_CASE("tiny initial data stays in the near-linear envelope") {
    const GronwallParams p = gronwall_threshold(1.0, 1.0, 1.0);
    const double g0 = 1e-8;
    const GronwallReport rep = gronwall_verify(p, g0, 10.0, 1e-6);
    CHECK(rep.bound_holds);
    for (const auto& [t, g] : rep.samples)
        CHECK(g <= 2.0 * g0 * std::exp(-p.C7 * t * (1.0 - 1e-3)));
}

TEST_CASE("super-threshold cubic data blows up as an observation") {
    const GronwallParams p = gronwall_threshold(1.0, 1.0, 50.0);
    const GronwallReport rep = gronwall_verify(p, 0.5, 20.0, 1e-6);
    CHECK_FALSE(rep.below_threshold);
    CHECK(rep.blow_up);
    CHECK_FALSE(rep.bound_holds);
}

TEST_CASE("decay bound holds with zero nonlinear scaling on a convex run") {
    // d constant and phi lambda-convex: the flow dissipates faster than
    // e^{-lambda t}, so lambda D + dD/dt <= 0 without any nonlinear help.
    ProblemSpec spec;
    spec.grid = build_grid(1, {{-1.0, 1.0}}, {64});
    spec.alpha = 2.0;
    spec.d = CoefficientSpec::constant(5.0);
    spec.phi = CoefficientSpec::quadratic(2.0);
    spec.rho0 = CoefficientSpec::gaussian(1.0, {0.0, 0.0}, 0.4, 0.2);
    spec.lambda = 2.0;
    spec.solver.t_end = 0.25;
    spec.solver.record_every = 100;
    const RunResult res = run(prepare(spec));
    // Skip the first record so the centered differences sit in the
    // smoothly decaying regime.
    std::vector<DiagnosticsRecord> window(res.records.begin() + 1, res.records.end());
    const DecayBoundReport rep = decay_bound_check(window, spec.lambda, 1.0, 1.0);
    CHECK(rep.checked > 50);
    CHECK(rep.positive_residuals == 0);
    CHECK(rep.s_min == 0.0);
    CHECK(rep.feasible);
}

TEST_CASE("decay bound check on a synthetic pure exponential") {
    std::vector<DiagnosticsRecord> records(200);
    const double lambda = 1.5;
    for (int i = 0; i < 200; ++i) {
        records[i].t = 0.002 * i;
        records[i].D = std::exp(-lambda * records[i].t);
    }
    const DecayBoundReport rep = decay_bound_check(records, lambda, 0.0, 0.0);
    CHECK(rep.checked == 198);
    // Centered differencing of exp(-lambda t) leaves O((lambda dt)^2).
    CHECK(std::abs(rep.max_residual) <= 1e-4);
    CHECK(rep.feasible);

    // A much larger claimed rate cannot hold without nonlinear terms.
    const DecayBoundReport bad = decay_bound_check(records, 3.0 * lambda, 0.0, 0.0);
    CHECK(bad.positive_residuals > 0);
    CHECK_FALSE(bad.feasible);

    // But scaled nonlinear terms can close it; s_min reports how much.
    const DecayBoundReport scaled = decay_bound_check(records, 3.0 * lambda, 1.0, 1.0);
    CHECK(scaled.positive_residuals > 0);
    CHECK(scaled.feasible);
    CHECK(scaled.s_min > 0.0);
}

TEST_SUITE_END();
