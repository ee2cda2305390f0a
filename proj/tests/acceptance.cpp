// Acceptance suite: one pass/fail line per criterion, nonzero exit on
// any failure. Criteria combine closed-form oracles with the structural
// properties of the flow (conservation, dissipation, decay, symmetry).
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "nfp/nfp.hpp"

using namespace nfp;

namespace {

struct Gate {
    int passed = 0;
    int failed = 0;
    void check(int id, const std::string& name, bool ok, const std::string& detail) {
        std::printf("[%s] criterion %2d: %s  (%s)\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        ok ? ++passed : ++failed;
    }
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// alpha=2, d=5, phi=x^2 (lambda=2), even positive rho0 on (-1,1).
ProblemSpec baseline_spec(int cells, double t_end) {
    ProblemSpec spec;
    spec.grid = build_grid(1, {{-1.0, 1.0}}, {cells});
    spec.alpha = 2.0;
    spec.d = CoefficientSpec::constant(5.0);
    spec.phi = CoefficientSpec::quadratic(2.0);
    spec.rho0 = CoefficientSpec::gaussian(1.0, {0.0, 0.0}, 0.4, 0.2);
    spec.lambda = 2.0;
    spec.solver.t_end = t_end;
    spec.solver.record_every = 500;
    spec.solver.cfl = 0.45;
    return spec;
}

}  // namespace

int main() {
    Gate gate;

    // ---- Baseline run: criteria 1, 2, 5, 11, 12 share it. ----
    const ProblemSpec base = baseline_spec(200, 5.0);
    const ProblemData data = prepare(base);
    const EquilibriumResult base_eq = solve_equilibrium(data, 1e-10);

    double max_asym = 0.0;
    std::vector<double> l1_to_eq;
    const int n = base.grid.cells[0];
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult base_run = run(data, [&](const State& s, const DiagnosticsRecord&) {
        for (int i = 0; i < n / 2; ++i)
            max_asym = std::max(max_asym, std::abs(s.rho.values[i] - s.rho.values[n - 1 - i]));
        l1_to_eq.push_back(l1_distance(s.rho, base_eq.rho_inf));
    });
    const double base_seconds = seconds_since(t0);

    // 1. Mass conservation over the full run.
    {
        double drift = 0.0;
        for (const auto& r : base_run.records) drift = std::max(drift, std::abs(r.mass - 1.0));
        gate.check(1, "mass conservation", drift <= 1e-10 && base_seconds <= 30.0,
                   fmt("|mass-1| <= %.2e, run %.1fs (limit 30s)", drift, base_seconds));
    }

    // 2. Free energy non-increasing at every accepted step. The run
    // aborts on any per-step increase; re-check the records too.
    {
        bool ok = true;
        for (std::size_t k = 1; k < base_run.records.size(); ++k)
            ok = ok && base_run.records[k].F <=
                           base_run.records[k - 1].F +
                               1e-12 * (1.0 + std::abs(base_run.records[k - 1].F));
        gate.check(2, "energy dissipation", ok,
                   fmt("per-step monitor held for %zu steps, F %.6f -> %.6f",
                       base_run.accepted_steps, base_run.records.front().F,
                       base_run.records.back().F));
    }

    // 3. Dissipation identity: residual order in dt within [0.8, 2.2] at N=400.
    {
        ProblemSpec spec = baseline_spec(400, 0.01);
        const ProblemData d400 = prepare(spec);
        const double dt0 = 0.5 * adaptive_dt(State{d400.rho0, 0.0}, d400);
        const std::vector<double> dts{dt0, 0.5 * dt0, 0.25 * dt0};
        const std::vector<int> ns{400};
        const IdentityStudy study = identity_convergence_study(spec, dts, ns);
        bool ok = study.identity_orders.size() == 2;
        std::string orders;
        for (double o : study.identity_orders) {
            ok = ok && o >= 0.8 && o <= 2.2;
            orders += fmt("%.3f ", o);
        }
        gate.check(3, "dissipation identity order", ok,
                   fmt("orders in dt: %s(window [0.8, 2.2])", orders.c_str()));
    }

    // 4. Equilibrium oracle: alpha=2, d=1, phi=x^2 gives C=4/3.
    {
        ProblemSpec spec = baseline_spec(400, 1.0);
        spec.d = CoefficientSpec::constant(1.0);
        const ProblemData d400 = prepare(spec);
        const EquilibriumResult eq = solve_equilibrium(d400, 1e-9);
        const double h = spec.grid.h[0];
        const double err = std::abs(eq.C - 4.0 / 3.0);
        const bool ok = err <= 1e-6 + 2 * h * h && eq.dissipation_residual <= 1e-10;
        gate.check(4, "equilibrium constant", ok,
                   fmt("|C-4/3| = %.2e (tol %.2e), D[rho_inf] = %.2e", err, 1e-6 + 2 * h * h,
                       eq.dissipation_residual));
    }

    // 5. Monotone convergence to the equilibrium profile in L1.
    {
        bool monotone = true;
        for (std::size_t k = 1; k < l1_to_eq.size(); ++k)
            monotone = monotone && l1_to_eq[k] <= l1_to_eq[k - 1] + 1e-13;
        const double final_dist = l1_to_eq.back();
        gate.check(5, "convergence to equilibrium", monotone && final_dist <= 1e-3,
                   fmt("L1 distance %.2e at t=5, monotone=%s", final_dist,
                       monotone ? "yes" : "no"));
    }

    // 6. Exponential decay of D: rate >= 0.9 lambda, r^2 >= 0.99 on the
    // second half. Run the baseline coefficients over a horizon where D
    // stays far above the roundoff floor: d=5 makes the true decay
    // (rate ~ 100) vastly faster than the theorem's e^{-lambda t}
    // bound, so by t ~ 0.55 the dissipation has bottomed out near
    // 1e-23 and any later window would fit noise.
    {
        const auto t6 = std::chrono::steady_clock::now();
        ProblemSpec spec = baseline_spec(200, 0.35);
        spec.solver.record_every = 100;
        const ProblemData d6 = prepare(spec);
        const RunResult res = run(d6);
        const DecayFit fit = fit_decay(res.records, 0.5 * spec.solver.t_end, spec.solver.t_end);
        const double elapsed = seconds_since(t6);
        const bool ok =
            fit.valid && fit.rate >= 0.9 * spec.lambda && fit.r_squared >= 0.99 && elapsed <= 60.0;
        gate.check(6, "exponential decay of D", ok,
                   fmt("rate %.2f >= %.2f, r^2 %.6f over [%.3f, %.3f], %.1fs (limit 60s)", fit.rate,
                       0.9 * spec.lambda, fit.r_squared, fit.t_lo, fit.t_hi, elapsed));
    }

    // 7. Second-derivative decomposition against -dD/dt on the
    // variable-d run, 5% at N=400 and improving at N=800.
    {
        ProblemSpec spec = baseline_spec(400, 0.3);
        spec.d = CoefficientSpec::poly1d({5.0, 0.5});
        const std::vector<double> dts{0.0};  // stability-limited adaptive dt
        const std::vector<int> ns{400, 800};
        const IdentityStudy study = identity_convergence_study(spec, dts, ns);
        const double e400 = study.rows[0].residual_decomposition;
        const double e800 = study.rows[1].residual_decomposition;
        const bool ok = e400 > 0.0 && e400 <= 0.05 && e800 < e400;
        gate.check(7, "decomposition check", ok,
                   fmt("rel err %.4f at N=400 (<= 0.05), %.4f at N=800", e400, e800));
    }

    // 8. Constant-d reduction: the inhomogeneity integrals vanish
    // identically and the reconstruction collapses to three terms.
    {
        const EntropyTerms terms = entropy_terms(base_run.final_state.rho, data);
        const double a = data.alpha;
        const double three_term =
            2 * terms.I1 + 2 * (a - 1) * terms.I2 + 2 * (a - 1) * (a - 1) * terms.I3;
        const bool ok = terms.I5 == 0.0 && terms.I6 == 0.0 && terms.I7 == 0.0 &&
                        terms.d2F_reconstructed == three_term;
        gate.check(8, "constant-d reduction", ok,
                   fmt("I5=%g I6=%g I7=%g, reconstruction matches exactly", terms.I5, terms.I6,
                       terms.I7));
    }

    // 9. Gronwall lemma: C10 closed form and 20 sub-threshold decays.
    {
        const auto t9 = std::chrono::steady_clock::now();
        const GronwallParams params = gronwall_threshold(1.0, 1.0, 1.0);
        const double closed = 4.0 * 3.14159265358979323846 / (3.0 * std::sqrt(3.0));
        const double c10_err = std::abs(params.C10 - closed);
        bool bounds_ok = true;
        for (int k = 0; k < 20; ++k) {
            const double g0 = params.threshold * (k + 0.5) / 20.5;
            const GronwallReport rep = gronwall_verify(params, g0, 20.0, 1e-6);
            bounds_ok = bounds_ok && rep.bound_holds;
        }
        const double elapsed = seconds_since(t9);
        gate.check(9, "Gronwall threshold and decay", c10_err <= 1e-8 && bounds_ok && elapsed <= 5.0,
                   fmt("|C10-closed| = %.2e, 20/20 bounds hold=%s, %.2fs (limit 5s)", c10_err,
                       bounds_ok ? "yes" : "no", elapsed));
    }

    // 10. Interpolation inequality: 1000 seeded fields, zero violations.
    {
        const auto t10 = std::chrono::steady_clock::now();
        const GridSpec g = build_grid(1, {{0.0, 1.0}}, {256});
        const double c_sob = estimate_sobolev_constant(g, 6.0, 400, 2024, 1.5);
        const InterpConstants constants = make_interp_constants(c_sob, 0.5, 2.0, 6.0, g.measure());
        const InterpReport rep = check_interpolation(g, 0.5, 2.0, constants, 1000, 909);
        const double elapsed = seconds_since(t10);
        gate.check(10, "interpolation inequality", rep.violations == 0 && elapsed <= 60.0,
                   fmt("%d violations / %d samples, max ratio %.3f, %.1fs (limit 60s)",
                       rep.violations, rep.samples, rep.max_ratio, elapsed));
    }

    // 11. Subsequence decay witnesses for at least 5 halvings of D.
    {
        const SubsequenceDecay sub = subsequence_decay(base_run.records, 5);
        gate.check(11, "subsequence decay witnesses", sub.found,
                   fmt("%d halvings witnessed, first at t=%.4f", sub.levels,
                       sub.witness_times.empty() ? 0.0 : sub.witness_times.front()));
    }

    // 12. Even initial data stays even to 1e-12 at all recorded times.
    {
        gate.check(12, "symmetry preservation", max_asym <= 1e-12,
                   fmt("max |rho(x) - rho(-x)| = %.2e over %zu records", max_asym,
                       base_run.records.size()));
    }

    std::printf("%d passed, %d failed\n", gate.passed, gate.failed);
    return gate.failed == 0 ? 0 : 1;
}
