#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wsurf/grid_surface.hpp"

namespace wsurf {

/// Zero-mean Gaussian family with diagonal covariance, stored in square-root
/// coordinates γ_k(s,t) = √Σ_kk(s,t). All entries strictly positive.
class DiagonalCovSurface {
public:
    explicit DiagonalCovSurface(SurfaceField sqrt_coords);

    const SurfaceField& sqrt_coords() const noexcept { return gamma_; }
    const Grid2& grid() const noexcept { return gamma_.grid(); }
    std::size_t dim() const noexcept { return gamma_.dim(); }

    // Σ_kk = γ_k² on every node.
    SurfaceField covariances() const;

private:
    SurfaceField gamma_;
};

// Entrywise square root of a grid of positive diagonal covariances.
DiagonalCovSurface sqrt_coords(const SurfaceField& sigma_diag);

// ((1-τ)√σ0 + τ√σ1)² entrywise: the W2 geodesic between diagonal Gaussians.
std::vector<double> gaussian_geodesic_diag(std::span<const double> sig0, std::span<const double> sig1, double tau);

// Geodesic edges between four diagonal-covariance corners, in √Σ coordinates.
BoundarySpec gaussian_boundary_from_corners(std::span<const double> c00, std::span<const double> c10,
                                            std::span<const double> c01, std::span<const double> c11,
                                            const Grid2& grid);

enum class Direction { S, T };

// Diagonal Lyapunov velocity A_kk = ∂Σ_kk / (2 Σ_kk). Central differences on
// interior nodes, second-order one-sided differences on edges (needs >= 3 nodes).
SurfaceField lyapunov_velocity(const DiagonalCovSurface& surf, Direction dir);

// Same stencil as lyapunov_velocity, applied to an arbitrary field.
SurfaceField finite_difference(const SurfaceField& f, Direction dir);

/// Diagonal velocity coefficients and multipliers on every node.
struct CriticalFields {
    SurfaceField a_s;
    SurfaceField a_t;
    SurfaceField s_s;
    SurfaceField s_t;
    SurfaceField j;  // dim 1
};

struct MwOptions {
    // Residual is evaluated on nodes with border <= i <= ns-1-border (same in t).
    std::size_t border = 1;
    // When positive, the window is instead the nodes with s and t in
    // [margin, 1 - margin], a fixed region of the parameter square so that
    // residuals on refined grids are compared at the same points.
    double margin = 0.0;
    // Nodes feeding the residual with J <= j_min raise DegenerateError.
    double j_min = 1e-12;
};

// A_s, A_t from the Lyapunov equations and S_s, S_t from the first block of
// the critical-point system; J is checked on the nodes named by `opts`.
CriticalFields critical_fields(const DiagonalCovSurface& surf, const MwOptions& opts = {});

struct MwResidual {
    // Full-grid field; entries outside the evaluation window are zero.
    SurfaceField residual;
    double max_norm = 0.0;
    std::size_t i_begin = 0, i_end = 0, j_begin = 0, j_end = 0;  // half-open window
};

// ∂_s S_s + ∂_t S_t + ½J⁻¹{A_s² tr(ΣA_t²) + A_t² tr(ΣA_s²) − 2 A_s A_t ½tr(Σ(A_sA_t + A_tA_s))},
// entrywise on the diagonal.
MwResidual critical_residual_mw(const DiagonalCovSurface& surf, const MwOptions& opts = {});

}  // namespace wsurf
