// Stationary state: alpha d(x) rho^(alpha-1) + phi(x) = C on the
// support, with C fixed by unit mass. The positive-part convention
// rho = ((C - phi)_+ / (alpha d))^(1/(alpha-1)) also covers compactly
// supported equilibria; the positivity flag reports which regime the
// result landed in.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nfp/functionals.hpp"
#include "nfp/grid.hpp"
#include "nfp/problem.hpp"

namespace nfp {

struct EquilibriumResult {
    double C = 0.0;
    ScalarField rho_inf;
    double mass_residual = 0.0;         // m(C) - 1 at the returned C
    double dissipation_residual = 0.0;  // D[rho_inf] over faces inside the support
    bool positivity = false;            // true iff C > max phi, so rho_inf > 0 everywhere
    int bracket_doublings = 0;
    int bisection_iterations = 0;
};

namespace detail {

inline ScalarField equilibrium_profile(double C, const ProblemData& p) {
    ScalarField rho = ScalarField::zeros(p.grid);
    const double inv = 1.0 / (p.alpha - 1.0);
    for (std::size_t c = 0; c < rho.values.size(); ++c) {
        const double num = C - p.phi.values[c];
        rho.values[c] = num > 0.0 ? pow_fast(num / (p.alpha * p.d.values[c]), inv) : 0.0;
    }
    return rho;
}

}  // namespace detail

/// m(C) = sum ((C - phi)_+ / (alpha d))^(1/(alpha-1)) vol. Continuous and
/// nondecreasing in C; zero for C <= min phi.
inline double equilibrium_mass(double C, const ProblemData& p) {
    return mass(detail::equilibrium_profile(C, p));
}

inline double l1_distance(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("l1_distance: fields live on different grids");
    KahanSum s;
    for (std::size_t c = 0; c < a.values.size(); ++c) s.add(std::abs(a.values[c] - b.values[c]));
    return s.value() * a.grid.cell_volume();
}

inline EquilibriumResult solve_equilibrium(const ProblemData& p, double tol = 1e-12) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_equilibrium: tol must be positive");
    auto [phi_lo, phi_hi] = field_min_max(p.phi);

    EquilibriumResult res;

    // Bracket: m(min phi) = 0; expand upward until the mass exceeds 1.
    double lo = phi_lo;
    double delta = 1.0;
    double hi = lo + delta;
    double m_hi = equilibrium_mass(hi, p);
    while (m_hi < 1.0) {
        delta *= 2.0;
        hi = lo + delta;
        m_hi = equilibrium_mass(hi, p);
        if (++res.bracket_doublings > 60)
            throw std::runtime_error("solve_equilibrium: bracket expansion failed (pathological coefficients)");
    }

    while (std::abs(m_hi - 1.0) > tol && res.bisection_iterations < 100) {
        const double mid = 0.5 * (lo + hi);
        const double m_mid = equilibrium_mass(mid, p);
        if (m_mid < 1.0) {
            lo = mid;
        } else {
            hi = mid;
            m_hi = m_mid;
        }
        ++res.bisection_iterations;
    }

    res.C = hi;
    res.rho_inf = detail::equilibrium_profile(hi, p);
    res.mass_residual = m_hi - 1.0;
    res.positivity = hi > phi_hi;

    // Dissipation over faces whose two cells both carry positive
    // density. mu is assembled locally: alpha d rho^(alpha-1) is zero
    // outside the support, which the guarded potential would reject.
    {
        const GridSpec& g = p.grid;
        ScalarField mu = ScalarField::zeros(g);
        for (std::size_t c = 0; c < mu.values.size(); ++c)
            mu.values[c] = p.alpha * p.d.values[c] * pow_fast(res.rho_inf.values[c], p.alpha - 1.0) +
                           p.phi.values[c];
        KahanSum s;
        const int nx = g.cells[0];
        const int ny = g.cells[1];
        for (int j = 0; j < ny; ++j)
            for (int i = 1; i < nx; ++i) {
                const double rl = res.rho_inf.values[g.index(i - 1, j)];
                const double rr = res.rho_inf.values[g.index(i, j)];
                if (rl <= 0.0 || rr <= 0.0) continue;
                const double gm = (mu.values[g.index(i, j)] - mu.values[g.index(i - 1, j)]) / g.h[0];
                s.add(gm * gm * 0.5 * (rl + rr));
            }
        if (g.dim == 2)
            for (int j = 1; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const double rl = res.rho_inf.values[g.index(i, j - 1)];
                    const double rr = res.rho_inf.values[g.index(i, j)];
                    if (rl <= 0.0 || rr <= 0.0) continue;
                    const double gm = (mu.values[g.index(i, j)] - mu.values[g.index(i, j - 1)]) / g.h[1];
                    s.add(gm * gm * 0.5 * (rl + rr));
                }
        res.dissipation_residual = s.value() * g.cell_volume();
    }
    return res;
}

}  // namespace nfp
