#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wsurf/errors.hpp"

namespace wsurf {

/// Uniform tensor grid on the parameter square [0,1]².
class Grid2 {
public:
    Grid2(std::size_t ns, std::size_t nt);

    std::size_t ns() const noexcept { return ns_; }
    std::size_t nt() const noexcept { return nt_; }
    double hs() const noexcept { return 1.0 / static_cast<double>(ns_ - 1); }
    double ht() const noexcept { return 1.0 / static_cast<double>(nt_ - 1); }

    // node(0) == 0 and node(last) == 1 exactly.
    double s(std::size_t i) const noexcept { return static_cast<double>(i) / static_cast<double>(ns_ - 1); }
    double t(std::size_t j) const noexcept { return static_cast<double>(j) / static_cast<double>(nt_ - 1); }

    bool is_boundary(std::size_t i, std::size_t j) const noexcept {
        return i == 0 || j == 0 || i + 1 == ns_ || j + 1 == nt_;
    }

    friend bool operator==(const Grid2&, const Grid2&) = default;

private:
    std::size_t ns_;
    std::size_t nt_;
};

/// ns × nt grid of m-vectors, stored row-major as (i, j, k).
class SurfaceField {
public:
    SurfaceField(Grid2 grid, std::size_t dim);
    SurfaceField(Grid2 grid, std::size_t dim, std::vector<double> values);

    const Grid2& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return dim_; }

    double& at(std::size_t i, std::size_t j, std::size_t k) noexcept { return values_[index(i, j, k)]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const noexcept { return values_[index(i, j, k)]; }

    std::span<double> node(std::size_t i, std::size_t j) noexcept {
        return {values_.data() + index(i, j, 0), dim_};
    }
    std::span<const double> node(std::size_t i, std::size_t j) const noexcept {
        return {values_.data() + index(i, j, 0), dim_};
    }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return (i * grid_.nt() + j) * dim_ + k;
    }

    bool all_finite() const noexcept;

    friend bool operator==(const SurfaceField&, const SurfaceField&) = default;

private:
    Grid2 grid_;
    std::size_t dim_;
    std::vector<double> values_;
};

/// Four edge curves of a surface patch. Each edge stores count × dim values:
/// s0 = nodes (0, j), s1 = (ns-1, j), t0 = (i, 0), t1 = (i, nt-1).
struct BoundarySpec {
    Grid2 grid;
    std::size_t dim;
    std::vector<double> s0;
    std::vector<double> s1;
    std::vector<double> t0;
    std::vector<double> t1;

    // Zero-filled edges of the right shapes.
    BoundarySpec(Grid2 grid, std::size_t dim);

    std::span<double> edge_s0(std::size_t j) { return {s0.data() + j * dim, dim}; }
    std::span<double> edge_s1(std::size_t j) { return {s1.data() + j * dim, dim}; }
    std::span<double> edge_t0(std::size_t i) { return {t0.data() + i * dim, dim}; }
    std::span<double> edge_t1(std::size_t i) { return {t1.data() + i * dim, dim}; }
    std::span<const double> edge_s0(std::size_t j) const { return {s0.data() + j * dim, dim}; }
    std::span<const double> edge_s1(std::size_t j) const { return {s1.data() + j * dim, dim}; }
    std::span<const double> edge_t0(std::size_t i) const { return {t0.data() + i * dim, dim}; }
    std::span<const double> edge_t1(std::size_t i) const { return {t1.data() + i * dim, dim}; }

    // Largest coordinate disagreement among the four shared corners.
    double corner_mismatch() const;
    bool corners_consistent(double tol = kCornerTolerance) const { return corner_mismatch() <= tol; }

    static constexpr double kCornerTolerance = 1e-12;
};

// Extract the four edges of a field.
BoundarySpec boundary_of(const SurfaceField& f);

// Transfinite (Coons) fill: edge blend minus the bilinear corner term.
// Edges of the result equal b exactly; corners take the s-edge values.
SurfaceField coons_init(const BoundarySpec& b);

// Overwrite the edges of f with b; interior untouched.
SurfaceField apply_boundary(SurfaceField f, const BoundarySpec& b);

}  // namespace wsurf
