#pragma once

#include <string>
#include <variant>

#include "wsurf/gaussian.hpp"
#include "wsurf/grid_surface.hpp"

namespace wsurf {

// z = a1 s + a2 t + a3
struct Plane {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
};

// z = (1/c) log(cos(c s − k1) / cos(c t − k2)) + offset
struct Scherk {
    double c = 1.0, k1 = 0.0, k2 = 0.0, offset = 0.0;
};

// z = c1 ± r1 arccosh(r / r1), r = √(s² + t²)
struct Catenoid {
    double c1 = 0.0, r1 = 1.0;
    int sign = +1;
};

// z = c1 arctan(t / s) + c2
struct Helicoid {
    double c1 = 1.0, c2 = 0.0;
};

using AnalyticSurface = std::variant<Plane, Scherk, Catenoid, Helicoid>;

std::string name_of(const AnalyticSurface& a);

/// Height and partial derivatives up to second order.
struct Jet {
    double z = 0.0, z_s = 0.0, z_t = 0.0, z_ss = 0.0, z_st = 0.0, z_tt = 0.0;
};

// Throws DomainError naming the violated predicate.
Jet eval(const AnalyticSurface& a, double s, double t);

// (1+z_t²) z_ss − 2 z_s z_t z_st + (1+z_s²) z_tt.
double ms_operator(const Jet& jet);

double ms_residual(const AnalyticSurface& a, double s, double t);

// jet + amplitude·sin(πs)·sin(πt), with derivatives.
Jet add_sine_bump(Jet jet, double amplitude, double s, double t);

// arccosh(x) = log(x + √(x²−1)); x below 1 + 1e-14 is treated as the branch point.
double arccosh_guarded(double x);

/// Axis-aligned sub-rectangle [s_lo, s_hi] × [t_lo, t_hi] of the surface domain.
struct Window {
    double s_lo = 0.0, s_hi = 1.0, t_lo = 0.0, t_hi = 1.0;

    double u(double s) const noexcept { return s_lo + (s_hi - s_lo) * s; }
    double v(double t) const noexcept { return t_lo + (t_hi - t_lo) * t; }
};

// γ(s,t) = (u(s), v(t), z(u,v) + bump·sin(πs)sin(πt)) on the grid: the graph
// parametrization with affine maps onto the window. m = 3.
SurfaceField sample_graph(const AnalyticSurface& a, const Grid2& grid, const Window& window, double bump = 0.0);

struct CovBoundary {
    BoundarySpec boundary;
    DiagonalCovSurface surface;
};

// The graph γ as √Σ coordinates; throws InvalidInput if any coordinate is not
// strictly positive (asks for a larger offset).
CovBoundary to_cov_boundary(const AnalyticSurface& a, const Grid2& grid, const Window& window);

}  // namespace wsurf
