#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wsurf/grid_surface.hpp"

namespace wsurf {

/// Inner-product weights and the degeneracy floor of the area element.
struct AreaConfig {
    // Added under the square root; >= 0.
    double epsilon = 1e-12;
    // Weight w_k of coordinate k. Empty means all ones.
    std::vector<double> weights;
    // Neumaier-compensated accumulation of the total area.
    bool compensated = false;
    // Cell evaluation threads. Results are bitwise independent of this value.
    unsigned threads = 1;

    double weight(std::size_t k) const noexcept { return weights.empty() ? 1.0 : weights[k]; }

    // Midpoint-rule weights 1/m for quantile surfaces.
    static AreaConfig quantile(std::size_t m, double epsilon = 1e-12);

    void validate(std::size_t dim) const;
};

struct CellTangents {
    std::vector<double> ds;
    std::vector<double> dt;
};

// Cell-centered tangents of cell (i, j): averages of the two forward
// differences across the cell.
CellTangents cell_tangents(const SurfaceField& f, std::size_t i, std::size_t j);

/// Weighted Gram entries ⟨ds,ds⟩, ⟨dt,dt⟩, ⟨ds,dt⟩.
struct Gram {
    double ss = 0.0;
    double tt = 0.0;
    double st = 0.0;

    double determinant() const noexcept { return ss * tt - st * st; }
};

Gram gram(std::span<const double> ds, std::span<const double> dt, const AreaConfig& cfg);

// √(max(⟨ds,ds⟩⟨dt,dt⟩ − ⟨ds,dt⟩², 0) + ε).
double area_element(std::span<const double> ds, std::span<const double> dt, const AreaConfig& cfg);

// Σ_cells area_element · hs · ht, summed in row-major cell order.
double total_area(const SurfaceField& f, const AreaConfig& cfg);

// ∂ total_area / ∂ f[i,j,k] on interior nodes; boundary entries are zero.
SurfaceField area_gradient(const SurfaceField& f, const AreaConfig& cfg);

/// Area, gradient, and per-cell degeneracy flags from a single pass.
struct AreaEvaluation {
    double area = 0.0;
    SurfaceField gradient;
    // Row-major over cells (ns-1) × (nt-1): Gram determinant below ε (or <= 0).
    std::vector<unsigned char> degenerate;
    std::size_t degenerate_count = 0;
};

AreaEvaluation evaluate_area(const SurfaceField& f, const AreaConfig& cfg, bool with_gradient = true);

// total_area(f + delta) − total_area(f), formed from per-cell Gram increments
// so that the result keeps its relative accuracy when delta is tiny.
double area_change(const SurfaceField& f, const SurfaceField& delta, const AreaConfig& cfg);

}  // namespace wsurf
