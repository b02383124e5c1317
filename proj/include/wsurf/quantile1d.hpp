#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "wsurf/grid_surface.hpp"

namespace wsurf {

// Standard normal helpers.
double normal_pdf(double x);
double normal_cdf(double x);
// Upper tail 1 - Φ(x) without cancellation.
double normal_sf(double x);
// Φ⁻¹(p): rational approximation refined by one Newton step. p in (0,1).
double inverse_normal_cdf(double p);

struct GaussianComponent {
    double mean;
    double stddev;
};

struct WeightedComponent {
    double weight;
    GaussianComponent gaussian;
};

/// Probability density on the real line: Gaussian, Gaussian mixture, or a
/// tabulated piecewise-linear pdf. Factories validate; every instance satisfies
/// its invariants.
class Density1D {
public:
    struct Gaussian {
        GaussianComponent g;
    };
    struct Mixture {
        std::vector<WeightedComponent> components;
    };
    struct Tabulated {
        std::vector<double> x;
        std::vector<double> pdf;  // normalized to unit trapezoid mass
        std::vector<double> cdf;  // prefix sums at the x nodes
    };

    static Density1D gaussian(double mean, double stddev);
    static Density1D mixture(std::vector<WeightedComponent> components);
    static Density1D tabulated(std::vector<double> x, std::vector<double> pdf);

    double pdf(double x) const;
    double cdf(double x) const;
    // 1 - cdf(x), evaluated directly in the upper tail.
    double sf(double x) const;
    double quantile(double z) const;

    const std::variant<Gaussian, Mixture, Tabulated>& repr() const noexcept { return repr_; }

private:
    explicit Density1D(std::variant<Gaussian, Mixture, Tabulated> r) : repr_(std::move(r)) {}
    std::variant<Gaussian, Mixture, Tabulated> repr_;
};

// Free-function form of Density1D::quantile.
inline double quantile(const Density1D& d, double z) { return d.quantile(z); }

/// Midpoint nodes z_k = (k + 1/2)/m on (0,1).
class QuantileGrid {
public:
    explicit QuantileGrid(std::size_t m);

    std::size_t size() const noexcept { return m_; }
    double node(std::size_t k) const noexcept { return (static_cast<double>(k) + 0.5) / static_cast<double>(m_); }
    std::vector<double> nodes() const;
    // Midpoint quadrature weights, all 1/m.
    std::vector<double> weights() const;

    friend bool operator==(const QuantileGrid&, const QuantileGrid&) = default;

private:
    std::size_t m_;
};

std::vector<double> quantiles(const Density1D& d, const QuantileGrid& qg);

/// Surface of quantile functions: entry (i, j, k) = Z(s_i, t_j, z_k).
struct QuantileSurface {
    SurfaceField field;
    QuantileGrid qgrid;

    QuantileSurface(SurfaceField f, QuantileGrid qg);
};

// W2 displacement interpolation: (1-τ) F0⁻¹(z_k) + τ F1⁻¹(z_k).
std::vector<double> geodesic_quantiles(const Density1D& d0, const Density1D& d1, double tau,
                                       const QuantileGrid& qg);

// Four geodesic edges between corner densities c00=(s=0,t=0), c10, c01, c11.
BoundarySpec boundary_from_corners(const Density1D& c00, const Density1D& c10, const Density1D& c01,
                                   const Density1D& c11, const Grid2& grid, const QuantileGrid& qg);

struct MonotonicityReport {
    std::size_t violations = 0;
    double worst_gap = 0.0;  // most negative Z(z_{k+1}) - Z(z_k); 0 when monotone
};

MonotonicityReport monotonicity_report(const QuantileSurface& q);

/// Quadrature against a reference density ρ00 on a uniform x-grid covering
/// [F⁻¹(tail), F⁻¹(1-tail)]; weights are trapezoid ρ00·dx, normalized to 1.
struct ReferenceQuadrature {
    std::vector<double> x;
    std::vector<double> weight;
};

ReferenceQuadrature reference_quadrature(const Density1D& reference, std::size_t n, double tail = 1e-9);

// Cell tangents of the 1-D transport map T(s,t,x) = Z(s,t,F00(x)) for cell
// (i, j) of a quantile surface, sampled at the quadrature nodes. Z is
// interpolated linearly in z between quantile nodes (constant beyond the ends).
struct MapTangents {
    std::vector<double> ds;
    std::vector<double> dt;
};

MapTangents transport_map_tangents(const QuantileSurface& q, std::size_t i, std::size_t j,
                                   const Density1D& reference, const ReferenceQuadrature& quad);

// D(s,t,T): Gram-determinant area element of the map tangents in L²(ρ00).
double lagrangian_area_element(std::span<const double> ds, std::span<const double> dt,
                               const ReferenceQuadrature& quad);

}  // namespace wsurf
