#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsurf/area_functional.hpp"
#include "wsurf/grid_surface.hpp"

namespace wsurf {

enum class Method { GradientDescent, ConjugateGradient };

struct SolverConfig {
    int max_iters = 5000;
    // Stopping threshold on max_k |∂Area/∂f_k| / w_k over free interior entries.
    // Unset means 1e-8 · hs · ht.
    std::optional<double> grad_tol;
    // Polak-Ribière (clamped at zero) with restart on non-descent directions.
    Method method = Method::ConjugateGradient;
    double c1 = 1e-4;
    double backtrack = 0.5;
    double initial_step = 1.0;
    int max_backtracks = 40;
    // Coordinates the solver may move; empty means all. Graph problems pin
    // the parameter coordinates and move only the height.
    std::vector<std::size_t> free_coords;
    // Move only along the component of the (w-metric) gradient orthogonal to
    // the node tangent plane. The continuous area gradient is purely normal;
    // its discrete tangential part only reparametrizes the surface and, left
    // in, lets the mesh drift without converging. Requires all coordinates free.
    bool normal_projection = false;
    // Directions of coordinate space along which interior nodes never move
    // (any basis; orthonormalized in the w-metric). Two directions spanning a
    // plane onto which the initial surface projects one-to-one turn the
    // problem into a graph over that plane, a fixed gauge for the
    // reparametrization freedom. Requires all coordinates free.
    std::vector<std::vector<double>> fixed_directions;

    double tolerance(const Grid2& grid) const;
    void validate(std::size_t dim) const;
};

struct ElResidual {
    // Per-node residual, zero on the boundary, on excluded nodes and on pinned coordinates.
    SurfaceField residual;
    double max_norm = 0.0;
    // Interior nodes whose four incident cells are all degenerate.
    std::size_t excluded = 0;
};

// Divergence of the cell fluxes, differenced over adjacent cells:
// −∂Area/∂f / (hs · ht · w_k). Same stencils as the objective. `coords`
// restricts the coordinates reported; `normal_projection` reports only the
// part orthogonal to the node tangent plane (as the solver sees it).
ElResidual discrete_el_residual(const SurfaceField& f, const AreaConfig& acfg,
                                std::span<const std::size_t> coords = {}, bool normal_projection = false);

// Residual restricted exactly as `minimize` restricts its search under `cfg`
// (coordinate mask, normal projection or fixed directions).
ElResidual discrete_el_residual(const SurfaceField& f, const AreaConfig& acfg, const SolverConfig& cfg);

// Replace each interior node of the w-metric vector field `v` by its
// component w-orthogonal to span{∂_s f, ∂_t f} (central differences).
void project_normal(const SurfaceField& f, SurfaceField& v, const AreaConfig& acfg);

// A plane onto which the corner quadrilateral projects as a convex
// quadrilateral, w-orthonormalized. Coplanar corners give their own plane.
// Otherwise the plane is the part of the corners' 3-D span orthogonal to the
// segment joining the two diagonal midpoints; along that segment both
// diagonals project onto a common midpoint, so they cross. Fewer than two
// directions when the corners are collinear or coincide.
std::vector<std::vector<double>> corner_plane(const BoundarySpec& b, const AreaConfig& acfg);

struct SolveReport {
    SurfaceField surface;
    int iterations = 0;
    // Initial area followed by one entry per accepted step.
    std::vector<double> area_trace;
    double final_area = 0.0;
    double grad_norm = 0.0;
    double grad_tol = 0.0;
    double el_residual = 0.0;
    bool converged = false;
    std::size_t degenerate_cells = 0;
    std::size_t excluded_nodes = 0;
    // Empty on convergence; otherwise why the iteration stopped.
    std::string diagnostic;
};

// Armijo-backtracking descent on total_area over interior entries of the free
// coordinates. `init` must already carry the boundary `b`.
// Throws NumericalError on NaN/Inf, InvalidInput when a fixed plane is set and
// `init` does not project one-to-one onto it.
SolveReport minimize(const SurfaceField& init, const BoundarySpec& b, const SolverConfig& cfg,
                     const AreaConfig& acfg);

}  // namespace wsurf
