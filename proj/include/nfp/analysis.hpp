// Post-processing of diagnostic time series: exponential decay-rate
// fitting for D, the hypothesis report for the decay theorem, the
// subsequence-decay detector, and the refinement study of the
// dissipation identity dF/dt = -D and its second-derivative
// decomposition.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfp/equilibrium.hpp"
#include "nfp/functionals.hpp"
#include "nfp/problem.hpp"
#include "nfp/solver.hpp"

namespace nfp {

struct DecayFit {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double rate = 0.0;       // sigma in D ~ amplitude * exp(-sigma t)
    double amplitude = 0.0;
    double r_squared = 0.0;
    int samples = 0;
    bool valid = false;      // D > 0 throughout the window and >= 10 samples
};

/// Least-squares line on (t, ln D) over [t_lo, t_hi].
inline DecayFit fit_decay(std::span<const DiagnosticsRecord> records, double t_lo, double t_hi) {
    DecayFit fit;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    if (!(t_lo < t_hi)) return fit;

    std::vector<double> ts, ys;
    for (const auto& r : records) {
        if (r.t < t_lo || r.t > t_hi) continue;
        if (!(r.D > 0.0)) return fit;  // valid stays false
        ts.push_back(r.t);
        ys.push_back(std::log(r.D));
    }
    fit.samples = static_cast<int>(ts.size());
    if (fit.samples < 10) return fit;

    double st = 0, sy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += ys[i];
    }
    const double n = static_cast<double>(ts.size());
    const double tbar = st / n, ybar = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxx += (ts[i] - tbar) * (ts[i] - tbar);
        sxy += (ts[i] - tbar) * (ys[i] - ybar);
        syy += (ys[i] - ybar) * (ys[i] - ybar);
    }
    if (sxx == 0.0) return fit;
    const double slope = sxy / sxx;
    fit.rate = -slope;
    fit.amplitude = std::exp(ybar - slope * tbar);
    double ss_res = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double e = ys[i] - (ybar + slope * (ts[i] - tbar));
        ss_res += e * e;
    }
    fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    fit.valid = true;
    return fit;
}

/// Measurable quantities appearing in the decay theorem's hypotheses.
/// The theorem's constants are existence-only; this records what can be
/// observed, it does not decide them.
struct HypothesisReport {
    double rho_min_observed = 0.0;  // c2 candidate over the run
    double rho_max_observed = 0.0;  // c3 candidate
    double min_d = 0.0;
    double sup_grad_d = 0.0;
    double sup_grad_phi = 0.0;
    double lambda = 0.0;
    double initial_dissipation = 0.0;
    bool strictly_positive = false;
    bool mass_preserved = false;
    bool lambda_positive = false;
};

inline HypothesisReport check_theorem_hypotheses(const ProblemData& p,
                                                 std::span<const DiagnosticsRecord> records) {
    HypothesisReport rep;
    rep.lambda = p.lambda;
    rep.lambda_positive = p.lambda > 0.0;
    auto [d_lo, d_hi] = field_min_max(p.d);
    rep.min_d = d_lo;
    rep.sup_grad_d = detail::sup_grad(p.d);
    rep.sup_grad_phi = detail::sup_grad(p.phi);
    if (!records.empty()) {
        rep.initial_dissipation = records.front().D;
        rep.rho_min_observed = records.front().rho_min;
        rep.rho_max_observed = records.front().rho_max;
        double mass_err = 0.0;
        for (const auto& r : records) {
            rep.rho_min_observed = std::min(rep.rho_min_observed, r.rho_min);
            rep.rho_max_observed = std::max(rep.rho_max_observed, r.rho_max);
            mass_err = std::max(mass_err, std::abs(r.mass - 1.0));
        }
        rep.strictly_positive = rep.rho_min_observed > 0.0;
        rep.mass_preserved = mass_err <= 1e-10;
    }
    return rep;
}

/// Increasing times along which D drops below 2^-k of its initial
/// value, k = 1..levels. Found iff at least `target_levels` crossings
/// exist.
struct SubsequenceDecay {
    bool found = false;
    int levels = 0;
    std::vector<double> witness_times;
    std::vector<double> thresholds;
};

inline SubsequenceDecay subsequence_decay(std::span<const DiagnosticsRecord> records,
                                          int target_levels = 5, int max_levels = 40) {
    SubsequenceDecay out;
    if (records.empty() || !(records.front().D > 0.0)) return out;
    const double d0 = records.front().D;
    double threshold = 0.5 * d0;
    std::size_t i = 1;
    while (out.levels < max_levels) {
        while (i < records.size() && !(records[i].D <= threshold)) ++i;
        if (i == records.size()) break;
        out.witness_times.push_back(records[i].t);
        out.thresholds.push_back(threshold);
        ++out.levels;
        threshold *= 0.5;
    }
    out.found = out.levels >= target_levels;
    return out;
}

/// One refinement level of the identity study.
struct IdentityRow {
    int cells = 0;
    double dt = 0.0;                   // 0 means stability-limited adaptive dt
    double residual_identity = 0.0;    // max_n |dF/dt + D_upwind|
    double residual_decomposition = 0.0;  // mid-run |-dD/dt - d2F| / |d2F|
    double d2F_reconstructed = 0.0;
    double dD_dt = 0.0;
};

struct IdentityStudy {
    std::vector<IdentityRow> rows;
    // log2 ratios of residual_identity between consecutive dt levels at equal N
    std::vector<double> identity_orders;
    // log2 ratios of residual_decomposition between consecutive N levels at equal dt
    std::vector<double> decomposition_orders;
};

namespace detail {

inline ProblemSpec with_cells(const ProblemSpec& spec, int n) {
    for (const CoefficientSpec* c : {&spec.d, &spec.phi, &spec.rho0})
        if (c->kind == CoeffKind::Tabulated)
            throw std::invalid_argument("identity study cannot re-grid tabulated coefficients");
    ProblemSpec s = spec;
    std::vector<std::pair<double, double>> bounds;
    std::vector<int> cells;
    for (int k = 0; k < spec.grid.dim; ++k) {
        bounds.emplace_back(spec.grid.lo[k], spec.grid.hi[k]);
        cells.push_back(n);
    }
    s.grid = build_grid(spec.grid.dim, bounds, cells);
    return s;
}

inline IdentityRow identity_level(const ProblemSpec& spec, int n, double dt_fixed) {
    const ProblemSpec level_spec = with_cells(spec, n);
    const ProblemData p = prepare(level_spec);
    const double t_end = p.controls.t_end;
    const double t_mid = 0.5 * t_end;

    IdentityRow row;
    row.cells = n;
    row.dt = dt_fixed;

    State state{p.rho0, 0.0};
    double F_prev = free_energy(state.rho, p);
    double max_residual = 0.0;

    // D samples bracketing t_mid for the centered time derivative, and
    // the entropy decomposition at the sample nearest t_mid.
    const double sample_gap = std::max(t_end / 4096.0, dt_fixed > 0.0 ? dt_fixed : 0.0);
    double next_sample = 0.0;
    std::vector<std::pair<double, double>> d_series;  // (t, D) near-mid samples
    bool entropy_done = false;

    const double t_eps = 1e-14 * std::max(1.0, t_end);
    while (state.t < t_end - t_eps) {
        double dt = dt_fixed > 0.0 ? dt_fixed : adaptive_dt(state, p);
        dt = std::min(dt, t_end - state.t);

        const double d_up = dissipation_upwind(state.rho, p);
        StepResult sr = step(state, p, dt);
        for (; !sr.accepted; sr = step(state, p, dt)) {
            dt *= 0.5;
            if (dt < 1e-12 * p.controls.dt_init)
                throw SolverError("identity study: dt underflow");
        }
        const double residual = std::abs((sr.report.F_after - F_prev) / dt + d_up);
        max_residual = std::max(max_residual, residual);
        F_prev = sr.report.F_after;
        state = std::move(sr.state);

        if (state.t >= next_sample) {
            next_sample = state.t + sample_gap;
            if (std::abs(state.t - t_mid) <= 8.0 * sample_gap)
                d_series.emplace_back(state.t, dissipation(state.rho, p));
            if (!entropy_done && state.t >= t_mid) {
                row.d2F_reconstructed = entropy_terms(state.rho, p).d2F_reconstructed;
                entropy_done = true;
            }
        }
    }
    row.residual_identity = max_residual;

    // Centered difference of the recorded D series across t_mid.
    if (d_series.size() >= 3 && entropy_done) {
        std::size_t k = 1;
        for (std::size_t i = 1; i + 1 < d_series.size(); ++i)
            if (std::abs(d_series[i].first - t_mid) < std::abs(d_series[k].first - t_mid)) k = i;
        const auto& [tm, dm] = d_series[k - 1];
        const auto& [tp, dp] = d_series[k + 1];
        row.dD_dt = (dp - dm) / (tp - tm);
        if (row.d2F_reconstructed != 0.0)
            row.residual_decomposition =
                std::abs(-row.dD_dt - row.d2F_reconstructed) / std::abs(row.d2F_reconstructed);
    }
    return row;
}

}  // namespace detail

/// Runs the solver on every (dt, N) pair of the refinement lists and
/// tabulates both residuals with their observed log2 convergence
/// ratios. dt = 0 requests the stability-limited adaptive step.
inline IdentityStudy identity_convergence_study(const ProblemSpec& spec,
                                                std::span<const double> dt_list,
                                                std::span<const int> n_list) {
    if (dt_list.empty() || n_list.empty())
        throw std::invalid_argument("identity study needs at least one dt and one N");
    IdentityStudy study;
    for (int n : n_list)
        for (double dt : dt_list) study.rows.push_back(detail::identity_level(spec, n, dt));

    const std::size_t n_dt = dt_list.size();
    for (std::size_t a = 0; a < n_list.size(); ++a)
        for (std::size_t i = 0; i + 1 < n_dt; ++i) {
            const auto& r0 = study.rows[a * n_dt + i];
            const auto& r1 = study.rows[a * n_dt + i + 1];
            if (r0.residual_identity > 0.0 && r1.residual_identity > 0.0 && r1.dt > 0.0 &&
                r0.dt > 0.0)
                study.identity_orders.push_back(std::log2(r0.residual_identity / r1.residual_identity) /
                                                std::log2(r0.dt / r1.dt));
        }
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
        for (std::size_t j = 0; j < n_dt; ++j) {
            const auto& r0 = study.rows[i * n_dt + j];
            const auto& r1 = study.rows[(i + 1) * n_dt + j];
            if (r0.residual_decomposition > 0.0 && r1.residual_decomposition > 0.0)
                study.decomposition_orders.push_back(
                    std::log2(r0.residual_decomposition / r1.residual_decomposition) /
                    std::log2(static_cast<double>(r1.cells) / r0.cells));
        }
    return study;
}

}  // namespace nfp
