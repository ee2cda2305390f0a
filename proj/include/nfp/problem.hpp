// Problem description: coefficient fields d(x), phi(x), initial density,
// exponent alpha, convexity modulus lambda, and validation of the standing
// assumptions (d bounded below, positive unit-mass initial data).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfp/grid.hpp"

namespace nfp {

enum class CoeffKind { Constant, Quadratic, Gaussian, Poly1D, Tabulated };

inline std::string to_string(CoeffKind k) {
    switch (k) {
        case CoeffKind::Constant: return "constant";
        case CoeffKind::Quadratic: return "quadratic";
        case CoeffKind::Gaussian: return "gaussian";
        case CoeffKind::Poly1D: return "poly1d";
        case CoeffKind::Tabulated: return "tabulated";
    }
    return "?";
}

/// One coefficient field. Analytic kinds evaluate pointwise at cell
/// centers; tabulated carries explicit per-cell values.
struct CoefficientSpec {
    CoeffKind kind = CoeffKind::Constant;
    double value = 0.0;                    // constant
    double modulus = 0.0;                  // quadratic: modulus/2 * |x-center|^2 + offset
    std::array<double, 2> center{0.0, 0.0};
    double offset = 0.0;
    double amplitude = 0.0;                // gaussian: amplitude * exp(-|x-center|^2/(2 width^2)) + offset
    double width = 1.0;
    std::vector<double> coeffs;            // poly1d: sum_k coeffs[k] * x^k
    std::vector<double> table;

    static CoefficientSpec constant(double c) {
        CoefficientSpec s;
        s.kind = CoeffKind::Constant;
        s.value = c;
        return s;
    }
    static CoefficientSpec quadratic(double modulus, std::array<double, 2> center = {0, 0},
                                     double offset = 0.0) {
        CoefficientSpec s;
        s.kind = CoeffKind::Quadratic;
        s.modulus = modulus;
        s.center = center;
        s.offset = offset;
        return s;
    }
    static CoefficientSpec gaussian(double amplitude, std::array<double, 2> center, double width,
                                    double offset = 0.0) {
        CoefficientSpec s;
        s.kind = CoeffKind::Gaussian;
        s.amplitude = amplitude;
        s.center = center;
        s.width = width;
        s.offset = offset;
        return s;
    }
    static CoefficientSpec poly1d(std::vector<double> coeffs) {
        CoefficientSpec s;
        s.kind = CoeffKind::Poly1D;
        s.coeffs = std::move(coeffs);
        return s;
    }
    static CoefficientSpec tabulated(std::vector<double> values) {
        CoefficientSpec s;
        s.kind = CoeffKind::Tabulated;
        s.table = std::move(values);
        return s;
    }

    // Pointwise value for the analytic kinds. Tabulated has no pointwise form.
    double evaluate_at(double x, double y = 0.0) const {
        switch (kind) {
            case CoeffKind::Constant:
                return value;
            case CoeffKind::Quadratic: {
                const double dx = x - center[0];
                const double dy = y - center[1];
                return 0.5 * modulus * (dx * dx + dy * dy) + offset;
            }
            case CoeffKind::Gaussian: {
                const double dx = x - center[0];
                const double dy = y - center[1];
                return amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width)) + offset;
            }
            case CoeffKind::Poly1D: {
                double acc = 0.0;
                for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
                return acc;
            }
            case CoeffKind::Tabulated:
                throw std::logic_error("tabulated coefficient has no pointwise evaluation");
        }
        return 0.0;
    }
};

inline ScalarField evaluate_coefficient(const CoefficientSpec& spec, const GridSpec& grid) {
    ScalarField f = ScalarField::zeros(grid);
    if (spec.kind == CoeffKind::Tabulated) {
        if (spec.table.size() != grid.cell_count())
            throw std::invalid_argument("tabulated coefficient: " + std::to_string(spec.table.size()) +
                                        " values for " + std::to_string(grid.cell_count()) + " cells");
        f.values = spec.table;
    } else {
        for (int j = 0; j < grid.cells[1]; ++j)
            for (int i = 0; i < grid.cells[0]; ++i)
                f.values[grid.index(i, j)] =
                    spec.evaluate_at(grid.center(0, i), grid.dim == 2 ? grid.center(1, j) : 0.0);
    }
    if (!is_finite(f)) throw std::invalid_argument("coefficient evaluates to non-finite values");
    return f;
}

struct SolverControls {
    double dt_init = 1e-3;
    double cfl = 0.45;            // in (0,1]
    double t_end = 1.0;
    int record_every = 100;       // accepted steps between diagnostic records
    double positivity_floor = 1e-12;
};

struct ProblemSpec {
    double alpha = 2.0;           // > 1
    GridSpec grid;
    CoefficientSpec d = CoefficientSpec::constant(1.0);
    CoefficientSpec phi = CoefficientSpec::constant(0.0);
    CoefficientSpec rho0 = CoefficientSpec::constant(1.0);
    double lambda = 0.0;          // declared convexity modulus of phi
    SolverControls solver;
};

/// Result of checking the standing assumptions. `fatal` problems stop a
/// run; everything else is reported and the solver proceeds.
struct ValidationReport {
    bool fatal = false;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    double min_d = 0.0;
    double sup_grad_d = 0.0;
    double sup_grad_phi = 0.0;
    double rho0_mass = 0.0;       // discrete mass before renormalization
    bool rho0_positive = false;
    std::string lambda_check;     // "verified" | "inconsistent" | "unverified"
    bool smoothness_verified = true;  // false for tabulated kinds
};

namespace detail {

// Max Euclidean norm of the finite-difference gradient: centered at
// interior cells, one-sided at boundary cells. Reporting only.
inline double sup_grad(const ScalarField& f) {
    const GridSpec& g = f.grid;
    const int nx = g.cells[0];
    const int ny = g.cells[1];
    double sup = 0.0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double gx;
            if (i == 0)
                gx = (f.at(1, j) - f.at(0, j)) / g.h[0];
            else if (i == nx - 1)
                gx = (f.at(nx - 1, j) - f.at(nx - 2, j)) / g.h[0];
            else
                gx = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.h[0]);
            double g2 = gx * gx;
            if (g.dim == 2) {
                double gy;
                if (j == 0)
                    gy = (f.at(i, 1) - f.at(i, 0)) / g.h[1];
                else if (j == ny - 1)
                    gy = (f.at(i, ny - 1) - f.at(i, ny - 2)) / g.h[1];
                else
                    gy = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * g.h[1]);
                g2 += gy * gy;
            }
            sup = std::max(sup, std::sqrt(g2));
        }
    }
    return sup;
}

}  // namespace detail

inline ScalarField normalize_density(const ScalarField& rho) {
    auto [lo, hi] = field_min_max(rho);
    if (!(lo > 0.0)) throw std::invalid_argument("normalize_density: field must be strictly positive");
    const double m = sum_cells(rho) * rho.grid.cell_volume();
    ScalarField out = rho;
    for (double& v : out.values) v /= m;
    return out;
}

inline ValidationReport validate_problem(const ProblemSpec& spec) {
    ValidationReport rep;
    if (!(spec.alpha > 1.0)) {
        rep.fatal = true;
        rep.errors.push_back("alpha must exceed 1, got " + std::to_string(spec.alpha));
        return rep;
    }

    const ScalarField d = evaluate_coefficient(spec.d, spec.grid);
    const ScalarField phi = evaluate_coefficient(spec.phi, spec.grid);
    const ScalarField rho0 = evaluate_coefficient(spec.rho0, spec.grid);

    auto [d_lo, d_hi] = field_min_max(d);
    rep.min_d = d_lo;
    if (!(d_lo > 0.0)) {
        rep.fatal = true;
        rep.errors.push_back("diffusion coefficient d must be strictly positive; min over cells is " +
                             std::to_string(d_lo));
    }
    auto [r_lo, r_hi] = field_min_max(rho0);
    rep.rho0_positive = r_lo > 0.0;
    if (!rep.rho0_positive) {
        rep.fatal = true;
        rep.errors.push_back("initial density must be strictly positive; min over cells is " +
                             std::to_string(r_lo));
    } else {
        rep.rho0_mass = sum_cells(rho0) * spec.grid.cell_volume();
    }

    rep.sup_grad_d = detail::sup_grad(d);
    rep.sup_grad_phi = detail::sup_grad(phi);

    switch (spec.phi.kind) {
        case CoeffKind::Quadratic:
            rep.lambda_check =
                std::abs(spec.phi.modulus - spec.lambda) <= 1e-12 * (1.0 + std::abs(spec.lambda))
                    ? "verified"
                    : "inconsistent";
            break;
        case CoeffKind::Constant:
            rep.lambda_check = spec.lambda == 0.0 ? "verified" : "inconsistent";
            break;
        default:
            rep.lambda_check = "unverified";
            break;
    }
    if (rep.lambda_check == "inconsistent")
        rep.warnings.push_back("declared lambda does not match the potential's convexity modulus");
    if (rep.lambda_check == "unverified")
        rep.warnings.push_back("lambda-convexity of phi not certified for kind " +
                               to_string(spec.phi.kind));

    rep.smoothness_verified = spec.d.kind != CoeffKind::Tabulated &&
                              spec.phi.kind != CoeffKind::Tabulated &&
                              spec.rho0.kind != CoeffKind::Tabulated;
    if (!rep.smoothness_verified)
        rep.warnings.push_back("tabulated coefficients present: smoothness unverified");

    if (!(spec.solver.cfl > 0.0 && spec.solver.cfl <= 1.0))
        rep.warnings.push_back("cfl outside (0,1]; stability and energy decay are not guaranteed");

    return rep;
}

/// Evaluated problem: coefficients sampled on the grid and the initial
/// density renormalized to unit discrete mass. All solver and
/// functional routines consume this form.
struct ProblemData {
    GridSpec grid;
    double alpha = 2.0;
    double lambda = 0.0;
    ScalarField d;
    ScalarField phi;
    ScalarField rho0;  // strictly positive, unit discrete mass
    SolverControls controls;
};

inline ProblemData prepare(const ProblemSpec& spec) {
    ValidationReport rep = validate_problem(spec);
    if (rep.fatal) {
        std::string msg = "invalid problem:";
        for (const auto& e : rep.errors) msg += " " + e;
        throw std::invalid_argument(msg);
    }
    ProblemData data;
    data.grid = spec.grid;
    data.alpha = spec.alpha;
    data.lambda = spec.lambda;
    data.d = evaluate_coefficient(spec.d, spec.grid);
    data.phi = evaluate_coefficient(spec.phi, spec.grid);
    data.rho0 = normalize_density(evaluate_coefficient(spec.rho0, spec.grid));
    data.controls = spec.solver;
    return data;
}

}  // namespace nfp
