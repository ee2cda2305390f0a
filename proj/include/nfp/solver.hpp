// Explicit upwind finite-volume integrator for
//   drho/dt = Div(rho grad mu),  mu = alpha d(x) rho^(alpha-1) + phi(x),
// with zero-flux boundary faces. Mass is conserved to roundoff by the
// flux form; positivity is kept by step rejection plus dt halving; the
// free energy is monitored and must not increase.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfp/functionals.hpp"
#include "nfp/grid.hpp"
#include "nfp/problem.hpp"

namespace nfp {

struct State {
    ScalarField rho;
    double t = 0.0;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline ScalarField chemical_potential(const State& state, const ProblemData& p) {
    return chemical_potential_field(state.rho, p);
}

namespace detail {

// Upwind flux through each interior face: face velocity
// g = -(mu_R - mu_L)/h, carried density from the cell the velocity
// leaves. Boundary faces stay exactly zero.
inline FaceField upwind_flux(const ScalarField& rho, const ScalarField& mu, const GridSpec& g,
                             double* max_speed = nullptr) {
    FaceField flux = FaceField::zeros(g);
    const int nx = g.cells[0];
    const int ny = g.cells[1];
    double vmax = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const double vel = -(mu.values[g.index(i, j)] - mu.values[g.index(i - 1, j)]) / g.h[0];
            const double up = vel > 0.0 ? rho.values[g.index(i - 1, j)] : rho.values[g.index(i, j)];
            flux.axis[0][flux.index0(i, j)] = vel * up;
            vmax = std::max(vmax, std::abs(vel));
        }
    if (g.dim == 2)
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double vel = -(mu.values[g.index(i, j)] - mu.values[g.index(i, j - 1)]) / g.h[1];
                const double up = vel > 0.0 ? rho.values[g.index(i, j - 1)] : rho.values[g.index(i, j)];
                flux.axis[1][flux.index1(i, j)] = vel * up;
                vmax = std::max(vmax, std::abs(vel));
            }
    if (max_speed) *max_speed = vmax;
    return flux;
}

}  // namespace detail

inline FaceField face_flux(const State& state, const ProblemData& p) {
    const ScalarField mu = chemical_potential(state, p);
    return detail::upwind_flux(state.rho, mu, p.grid);
}

struct StepReport {
    double dt_used = 0.0;
    double max_face_speed = 0.0;
    double F_before = 0.0;
    double F_after = 0.0;
    bool positivity_rejected = false;
};

struct StepResult {
    bool accepted = false;
    State state;
    StepReport report;
};

/// One forward-Euler update in flux form. The flux carries rho times the
/// velocity -grad mu, so the update rho - dt * div(flux) realizes
/// +Div(rho grad mu) * dt. Returns accepted=false (state untouched) if
/// any cell would drop to the positivity floor; the caller halves dt.
inline StepResult step(const State& state, const ProblemData& p, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    StepResult res;
    res.report.dt_used = dt;
    res.report.F_before = free_energy(state.rho, p);

    const ScalarField mu = chemical_potential(state, p);
    const FaceField flux = detail::upwind_flux(state.rho, mu, p.grid, &res.report.max_face_speed);
    const ScalarField div = divergence(flux);

    ScalarField rho_new = state.rho;
    const std::size_t n = rho_new.values.size();
    for (std::size_t c = 0; c < n; ++c) rho_new.values[c] -= dt * div.values[c];

    for (std::size_t c = 0; c < n; ++c)
        if (!(rho_new.values[c] > p.controls.positivity_floor)) {
            res.accepted = false;
            res.report.positivity_rejected = true;
            return res;
        }

    res.accepted = true;
    res.state = State{std::move(rho_new), state.t + dt};
    res.report.F_after = free_energy(res.state.rho, p);
    return res;
}

/// Stable step size: parabolic restriction
///   cfl * min h^2 / (2 dim max alpha(alpha-1) d rho^(alpha-1))
/// combined with the advective restriction cfl * min h / max |velocity|,
/// capped by dt_init.
inline double adaptive_dt(const State& state, const ProblemData& p) {
    const GridSpec& g = p.grid;
    const double a = p.alpha;
    double diff_max = 0.0;
    for (std::size_t c = 0; c < state.rho.values.size(); ++c)
        diff_max = std::max(diff_max,
                            a * (a - 1.0) * p.d.values[c] * pow_fast(state.rho.values[c], a - 1.0));
    double h_min = g.h[0];
    if (g.dim == 2) h_min = std::min(h_min, g.h[1]);

    double dt = p.controls.dt_init;
    if (diff_max > 0.0)
        dt = std::min(dt, p.controls.cfl * h_min * h_min / (2.0 * g.dim * diff_max));

    const ScalarField mu = chemical_potential(state, p);
    double vmax = 0.0;
    detail::upwind_flux(state.rho, mu, g, &vmax);
    if (vmax > 0.0) dt = std::min(dt, p.controls.cfl * h_min / vmax);
    return dt;
}

struct RunResult {
    State final_state;
    std::vector<DiagnosticsRecord> records;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

using RunObserver = std::function<void(const State&, const DiagnosticsRecord&)>;

inline DiagnosticsRecord make_record(const State& state, const ProblemData& p) {
    DiagnosticsRecord r;
    r.t = state.t;
    r.mass = mass(state.rho);
    r.F = free_energy(state.rho, p);
    r.D = dissipation(state.rho, p);
    auto [lo, hi] = field_min_max(state.rho);
    r.rho_min = lo;
    r.rho_max = hi;
    return r;
}

/// Integrate to t_end with adaptive dt. Hard guarantees, enforced as
/// errors rather than warnings: total mass drift <= 1e-10 and
/// F(t_{n+1}) <= F(t_n) + 1e-12 (1 + |F|) at every accepted step.
inline RunResult run(const ProblemData& p, const RunObserver& observer = {}) {
    RunResult out;
    State state{p.rho0, 0.0};
    if (!is_finite(state.rho)) throw SolverError("run: initial density is not finite");

    out.records.push_back(make_record(state, p));
    if (observer) observer(state, out.records.back());
    double F_prev = out.records.back().F;

    const double t_end = p.controls.t_end;
    const double dt_floor = 1e-12 * p.controls.dt_init;
    const double t_eps = 1e-14 * std::max(1.0, t_end);
    const std::size_t record_every = static_cast<std::size_t>(std::max(1, p.controls.record_every));

    while (state.t < t_end - t_eps) {
        double dt = std::min(adaptive_dt(state, p), t_end - state.t);
        StepResult sr;
        for (;;) {
            sr = step(state, p, dt);
            if (sr.accepted) break;
            dt *= 0.5;
            ++out.rejected_steps;
            if (dt < dt_floor)
                throw SolverError("run: dt underflow at t = " + std::to_string(state.t) +
                                  " (positivity cannot be preserved)");
        }
        if (sr.report.F_after > F_prev + 1e-12 * (1.0 + std::abs(F_prev)))
            throw SolverError("run: free energy increased at t = " + std::to_string(sr.state.t) +
                              " (F " + std::to_string(F_prev) + " -> " +
                              std::to_string(sr.report.F_after) + ")");
        F_prev = sr.report.F_after;
        state = std::move(sr.state);
        ++out.accepted_steps;

        if (out.accepted_steps % record_every == 0 || !(state.t < t_end - t_eps)) {
            out.records.push_back(make_record(state, p));
            if (observer) observer(state, out.records.back());
            if (std::abs(out.records.back().mass - 1.0) > 1e-10)
                throw SolverError("run: mass drifted to " + std::to_string(out.records.back().mass));
            if (!is_finite(state.rho)) throw SolverError("run: density became non-finite");
        }
    }

    out.final_state = std::move(state);
    return out;
}

}  // namespace nfp
