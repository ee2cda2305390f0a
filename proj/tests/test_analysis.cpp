#include "doctest.h"

#include <cmath>
#include <vector>

#include "nfp/analysis.hpp"

using namespace nfp;

namespace {

std::vector<DiagnosticsRecord> synthetic_decay(double amplitude, double rate, int n, double t_end,
                                               double wobble = 0.0) {
    std::vector<DiagnosticsRecord> records(n);
    for (int i = 0; i < n; ++i) {
        const double t = t_end * i / (n - 1);
        DiagnosticsRecord& r = records[i];
        r.t = t;
        r.mass = 1.0;
        r.D = amplitude * std::exp(-rate * t) * (1.0 + wobble * std::sin(7.0 * t));
        r.F = r.D;  // placeholder
        r.rho_min = 0.5;
        r.rho_max = 1.5;
    }
    return records;
}

}  // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("decay fit is exact on log-linear data") {
    const auto records = synthetic_decay(1.0, 2.0, 50, 5.0);
    const DecayFit fit = fit_decay(records, 0.0, 5.0);
    REQUIRE(fit.valid);
    CHECK(std::abs(fit.rate - 2.0) <= 1e-10);
    CHECK(std::abs(fit.amplitude - 1.0) <= 1e-10);
    CHECK(fit.r_squared >= 1.0 - 1e-12);
}

TEST_CASE("decay fit recovers amplitude and rate") {
    const auto records = synthetic_decay(3.0, 0.5, 80, 8.0);
    const DecayFit fit = fit_decay(records, 0.0, 8.0);
    REQUIRE(fit.valid);
    CHECK(fit.rate == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fit.amplitude == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("decay fit tolerates a small multiplicative perturbation") {
    const auto records = synthetic_decay(1.0, 2.0, 200, 6.0, 0.01);
    const DecayFit fit = fit_decay(records, 0.0, 6.0);
    REQUIRE(fit.valid);
    CHECK(std::abs(fit.rate - 2.0) / 2.0 <= 0.01);
}

TEST_CASE("decay fit rejects unusable windows") {
    auto records = synthetic_decay(1.0, 2.0, 50, 5.0);
    CHECK_FALSE(fit_decay(records, 4.9, 5.0).valid);  // too few samples
    CHECK_FALSE(fit_decay(records, 5.0, 4.0).valid);  // inverted window
    records[20].D = 0.0;
    CHECK_FALSE(fit_decay(records, 0.0, 5.0).valid);  // non-positive D
}

TEST_CASE("subsequence decay on synthetic series") {
    const auto monotone = synthetic_decay(1.0, 1.0, 400, 10.0);
    const SubsequenceDecay sub = subsequence_decay(monotone);
    CHECK(sub.found);
    CHECK(sub.levels >= 5);
    for (std::size_t k = 1; k < sub.witness_times.size(); ++k)
        CHECK(sub.witness_times[k] > sub.witness_times[k - 1]);
    // Crossings of 2^-k happen near t = k ln 2.
    for (std::size_t k = 0; k < std::min<std::size_t>(5, sub.witness_times.size()); ++k)
        CHECK(sub.witness_times[k] ==
              doctest::Approx((k + 1) * std::log(2.0)).epsilon(0.05));

    auto constant = synthetic_decay(1.0, 0.0, 100, 10.0);
    CHECK_FALSE(subsequence_decay(constant).found);
}

TEST_CASE("hypothesis report mirrors the recorded run") {
    ProblemSpec spec;
    spec.grid = build_grid(1, {{-1.0, 1.0}}, {40});
    spec.alpha = 2.0;
    spec.d = CoefficientSpec::constant(5.0);
    spec.phi = CoefficientSpec::quadratic(2.0);
    spec.rho0 = CoefficientSpec::gaussian(1.0, {0.0, 0.0}, 0.4, 0.2);
    spec.lambda = 2.0;
    spec.solver.t_end = 0.02;
    spec.solver.record_every = 20;
    const ProblemData data = prepare(spec);
    const RunResult res = run(data);
    const HypothesisReport rep = check_theorem_hypotheses(data, res.records);
    CHECK(rep.min_d == 5.0);
    CHECK(rep.sup_grad_d == 0.0);
    CHECK(rep.lambda == 2.0);
    CHECK(rep.strictly_positive);
    CHECK(rep.mass_preserved);
    CHECK(rep.initial_dissipation == doctest::Approx(dissipation(data.rho0, data)).epsilon(1e-14));
    CHECK(rep.rho_min_observed > 0.0);
    CHECK(rep.rho_max_observed >= rep.rho_min_observed);
}

TEST_CASE("hypothesis report flags a density that loses positivity") {
    ProblemSpec spec;
    spec.grid = build_grid(1, {{0.0, 1.0}}, {16});
    spec.alpha = 2.0;
    const ProblemData data = prepare(spec);
    std::vector<DiagnosticsRecord> records(3);
    records[0] = {0.0, 1.0, 1.0, 1.0, 0.5, 1.5};
    records[1] = {0.1, 1.0, 0.9, 0.5, 0.1, 1.4};
    records[2] = {0.2, 1.0, 0.8, 0.2, 0.0, 1.3};  // min rho hits zero
    const HypothesisReport rep = check_theorem_hypotheses(data, records);
    CHECK_FALSE(rep.strictly_positive);
    CHECK(rep.rho_min_observed == 0.0);
}

TEST_CASE("identity study at an exact equilibrium has zero residual") {
    ProblemSpec spec;
    spec.grid = build_grid(1, {{0.0, 1.0}}, {32});
    spec.alpha = 2.0;
    spec.d = CoefficientSpec::constant(1.0);
    spec.phi = CoefficientSpec::constant(0.0);
    spec.rho0 = CoefficientSpec::constant(1.0);
    spec.solver.t_end = 0.005;
    const std::vector<double> dts{1e-5};
    const std::vector<int> ns{32};
    const IdentityStudy study = identity_convergence_study(spec, dts, ns);
    REQUIRE(study.rows.size() == 1);
    CHECK(study.rows[0].residual_identity <= 1e-12);
}

TEST_CASE("identity study rejects tabulated coefficients and empty lists") {
    ProblemSpec spec;
    spec.grid = build_grid(1, {{0.0, 1.0}}, {8});
    spec.d = CoefficientSpec::tabulated(std::vector<double>(8, 1.0));
    const std::vector<double> dts{1e-5};
    const std::vector<int> ns{16};
    CHECK_THROWS_AS(identity_convergence_study(spec, dts, ns), std::invalid_argument);
    spec.d = CoefficientSpec::constant(1.0);
    CHECK_THROWS_AS(identity_convergence_study(spec, {}, ns), std::invalid_argument);
}

TEST_SUITE_END();
