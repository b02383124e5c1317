#include "wsurf/grid_surface.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsurf {

Grid2::Grid2(std::size_t ns, std::size_t nt) : ns_(ns), nt_(nt) {
    if (ns < 2 || nt < 2) {
        throw InvalidInput("Grid2 needs at least 2 nodes per direction, got " + std::to_string(ns) +
                           "x" + std::to_string(nt));
    }
}

SurfaceField::SurfaceField(Grid2 grid, std::size_t dim)
    : grid_(grid), dim_(dim), values_(grid.ns() * grid.nt() * dim, 0.0) {
    if (dim == 0) throw InvalidInput("SurfaceField dimension must be >= 1");
}

SurfaceField::SurfaceField(Grid2 grid, std::size_t dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
    if (dim == 0) throw InvalidInput("SurfaceField dimension must be >= 1");
    if (values_.size() != grid.ns() * grid.nt() * dim) {
        throw InvalidInput("SurfaceField expects " + std::to_string(grid.ns() * grid.nt() * dim) +
                           " values, got " + std::to_string(values_.size()));
    }
    if (!all_finite()) throw InvalidInput("SurfaceField values must be finite");
}

bool SurfaceField::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

BoundarySpec::BoundarySpec(Grid2 g, std::size_t d)
    : grid(g), dim(d), s0(g.nt() * d, 0.0), s1(g.nt() * d, 0.0), t0(g.ns() * d, 0.0), t1(g.ns() * d, 0.0) {
    if (d == 0) throw InvalidInput("BoundarySpec dimension must be >= 1");
}

double BoundarySpec::corner_mismatch() const {
    const std::size_t ls = grid.ns() - 1;
    const std::size_t lt = grid.nt() - 1;
    double worst = 0.0;
    auto cmp = [&](std::span<const double> a, std::span<const double> b) {
        for (std::size_t k = 0; k < dim; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    };
    cmp(edge_s0(0), edge_t0(0));
    cmp(edge_s1(0), edge_t0(ls));
    cmp(edge_s0(lt), edge_t1(0));
    cmp(edge_s1(lt), edge_t1(ls));
    return worst;
}

BoundarySpec boundary_of(const SurfaceField& f) {
    const Grid2& g = f.grid();
    BoundarySpec b(g, f.dim());
    for (std::size_t j = 0; j < g.nt(); ++j) {
        std::ranges::copy(f.node(0, j), b.edge_s0(j).begin());
        std::ranges::copy(f.node(g.ns() - 1, j), b.edge_s1(j).begin());
    }
    for (std::size_t i = 0; i < g.ns(); ++i) {
        std::ranges::copy(f.node(i, 0), b.edge_t0(i).begin());
        std::ranges::copy(f.node(i, g.nt() - 1), b.edge_t1(i).begin());
    }
    return b;
}

namespace {

void check_edges(const BoundarySpec& b) {
    const std::size_t ns = b.grid.ns(), nt = b.grid.nt();
    if (b.s0.size() != nt * b.dim || b.s1.size() != nt * b.dim || b.t0.size() != ns * b.dim ||
        b.t1.size() != ns * b.dim) {
        throw InvalidInput("boundary edge arrays have inconsistent lengths");
    }
}

void check_shapes(const SurfaceField& f, const BoundarySpec& b) {
    if (!(f.grid() == b.grid) || f.dim() != b.dim) {
        throw InvalidInput("boundary shape does not match surface field");
    }
    check_edges(b);
}

}  // namespace

SurfaceField apply_boundary(SurfaceField f, const BoundarySpec& b) {
    check_shapes(f, b);
    const Grid2& g = f.grid();
    for (std::size_t i = 0; i < g.ns(); ++i) {
        std::ranges::copy(b.edge_t0(i), f.node(i, 0).begin());
        std::ranges::copy(b.edge_t1(i), f.node(i, g.nt() - 1).begin());
    }
    for (std::size_t j = 0; j < g.nt(); ++j) {
        std::ranges::copy(b.edge_s0(j), f.node(0, j).begin());
        std::ranges::copy(b.edge_s1(j), f.node(g.ns() - 1, j).begin());
    }
    return f;
}

SurfaceField coons_init(const BoundarySpec& b) {
    check_edges(b);
    const double mismatch = b.corner_mismatch();
    if (!(mismatch <= BoundarySpec::kCornerTolerance)) {
        throw InvalidInput("boundary corners disagree by " + std::to_string(mismatch) +
                           " (tolerance 1e-12)");
    }
    const Grid2& g = b.grid;
    const std::size_t lt = g.nt() - 1;
    SurfaceField f(g, b.dim);
    // Equivalent form of the Coons sum: the bilinear corner patch plus each
    // edge's deviation from its own chord, blended linearly. Differences of
    // equal values vanish exactly, so constant edges give a constant fill.
    for (std::size_t i = 0; i < g.ns(); ++i) {
        const double s = g.s(i);
        for (std::size_t j = 0; j < g.nt(); ++j) {
            const double t = g.t(j);
            for (std::size_t k = 0; k < b.dim; ++k) {
                const double c00 = b.edge_s0(0)[k], c10 = b.edge_s1(0)[k];
                const double c01 = b.edge_s0(lt)[k], c11 = b.edge_s1(lt)[k];
                const double lo = c00 + s * (c10 - c00), hi = c01 + s * (c11 - c01);
                const double bilinear = lo + t * (hi - lo);
                const double d_s0 = b.edge_s0(j)[k] - (c00 + t * (c01 - c00));
                const double d_s1 = b.edge_s1(j)[k] - (c10 + t * (c11 - c10));
                const double d_t0 = b.edge_t0(i)[k] - lo;
                const double d_t1 = b.edge_t1(i)[k] - hi;
                f.at(i, j, k) = bilinear + (1.0 - s) * d_s0 + s * d_s1 + (1.0 - t) * d_t0 + t * d_t1;
            }
        }
    }
    return apply_boundary(std::move(f), b);
}

}  // namespace wsurf
