// Uniform cell-centered grids on intervals and rectangles, with the
// face-based gradient/divergence stencils shared by every other module.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nfp {

/// Uniform tensor grid, cell-centered. 1D interval or 2D axis-aligned
/// rectangle. Immutable after construction; cheap to copy.
struct GridSpec {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> cells{0, 1};  // cells[1] == 1 when dim == 1
    std::array<double, 2> h{0.0, 0.0};

    std::size_t cell_count() const {
        return static_cast<std::size_t>(cells[0]) * static_cast<std::size_t>(cells[1]);
    }

    // Measure of one cell (length in 1D, area in 2D).
    double cell_volume() const { return dim == 1 ? h[0] : h[0] * h[1]; }

    double measure() const {
        return dim == 1 ? (hi[0] - lo[0]) : (hi[0] - lo[0]) * (hi[1] - lo[1]);
    }

    double center(int axis, int i) const { return lo[axis] + (i + 0.5) * h[axis]; }

    std::size_t index(int i, int j = 0) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells[0]) * j;
    }

    bool operator==(const GridSpec&) const = default;
};

/// Cell-centered scalar samples (density, coefficients, potentials).
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    static ScalarField constant(const GridSpec& g, double c) {
        return ScalarField{g, std::vector<double>(g.cell_count(), c)};
    }
    static ScalarField zeros(const GridSpec& g) { return constant(g, 0.0); }

    double& at(int i, int j = 0) { return values[grid.index(i, j)]; }
    double at(int i, int j = 0) const { return values[grid.index(i, j)]; }
};

/// Per-axis face values. Along axis k there is one value per face,
/// boundary faces included; boundary faces hold whatever the boundary
/// rule assigned (zero for fluxes and gradients).
struct FaceField {
    GridSpec grid;
    std::array<std::vector<double>, 2> axis;

    static FaceField zeros(const GridSpec& g) {
        FaceField f;
        f.grid = g;
        const int nx = g.cells[0];
        const int ny = g.cells[1];
        f.axis[0].assign(static_cast<std::size_t>(nx + 1) * ny, 0.0);
        if (g.dim == 2) f.axis[1].assign(static_cast<std::size_t>(nx) * (ny + 1), 0.0);
        return f;
    }

    // Face i+1/2 between cells (i-1,j) and (i,j); i in [0, nx].
    std::size_t index0(int i, int j = 0) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(grid.cells[0] + 1) * j;
    }
    // Face j+1/2 between cells (i,j-1) and (i,j); j in [0, ny].
    std::size_t index1(int i, int j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(grid.cells[0]) * j;
    }
};

inline GridSpec build_grid(int dim, const std::vector<std::pair<double, double>>& bounds,
                           const std::vector<int>& cells) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("build_grid: dim must be 1 or 2, got " + std::to_string(dim));
    if (bounds.size() != static_cast<std::size_t>(dim) ||
        cells.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("build_grid: bounds/cells length must equal dim");
    GridSpec g;
    g.dim = dim;
    g.cells = {0, 1};
    for (int k = 0; k < dim; ++k) {
        const auto [a, b] = bounds[k];
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
            throw std::invalid_argument("build_grid: bounds must be finite and ordered lo < hi");
        if (cells[k] < 4)
            throw std::invalid_argument("build_grid: need at least 4 cells per axis, got " +
                                        std::to_string(cells[k]));
        g.lo[k] = a;
        g.hi[k] = b;
        g.cells[k] = cells[k];
        g.h[k] = (b - a) / cells[k];
    }
    return g;
}

/// Compensated (Kahan) sum; keeps cell sums accurate to a few ulps
/// independent of cell count.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double sum_cells(const ScalarField& f) {
    KahanSum s;
    for (double v : f.values) s.add(v);
    return s.value();
}

inline std::pair<double, double> field_min_max(const ScalarField& f) {
    double lo = f.values.front(), hi = f.values.front();
    for (double v : f.values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return {lo, hi};
}

inline bool is_finite(const ScalarField& f) {
    for (double v : f.values)
        if (!std::isfinite(v)) return false;
    return true;
}

/// Two-point difference per interior face; boundary faces are zero.
/// Only ever consumed through fluxes, which the no-flux condition
/// forces to zero on the boundary anyway.
inline FaceField gradient(const ScalarField& f) {
    const GridSpec& g = f.grid;
    FaceField out = FaceField::zeros(g);
    const int nx = g.cells[0];
    const int ny = g.cells[1];
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i)
            out.axis[0][out.index0(i, j)] = (f.values[g.index(i, j)] - f.values[g.index(i - 1, j)]) / g.h[0];
    if (g.dim == 2)
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out.axis[1][out.index1(i, j)] = (f.values[g.index(i, j)] - f.values[g.index(i, j - 1)]) / g.h[1];
    return out;
}

/// Cell value = sum over axes of (outgoing - incoming face value)/h.
/// Adjoint of gradient (up to sign) under the cell-measure inner
/// product whenever boundary faces vanish.
inline ScalarField divergence(const FaceField& F) {
    const GridSpec& g = F.grid;
    ScalarField out = ScalarField::zeros(g);
    const int nx = g.cells[0];
    const int ny = g.cells[1];
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            out.values[g.index(i, j)] =
                (F.axis[0][F.index0(i + 1, j)] - F.axis[0][F.index0(i, j)]) / g.h[0];
    if (g.dim == 2)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out.values[g.index(i, j)] +=
                    (F.axis[1][F.index1(i, j + 1)] - F.axis[1][F.index1(i, j)]) / g.h[1];
    return out;
}

}  // namespace nfp
