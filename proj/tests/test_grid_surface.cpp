#include <cmath>
#include <random>

#include "doctest.h"
#include "wsurf/analytic_surfaces.hpp"
#include "wsurf/grid_surface.hpp"

using namespace wsurf;

namespace {

SurfaceField sample(const Grid2& g, std::size_t dim, auto fn) {
    SurfaceField f(g, dim);
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.nt(); ++j)
            for (std::size_t k = 0; k < dim; ++k) f.at(i, j, k) = fn(g.s(i), g.t(j), k);
    return f;
}

double max_interior_gap(const SurfaceField& a, const SurfaceField& b) {
    double mx = 0.0;
    const Grid2& g = a.grid();
    for (std::size_t i = 1; i + 1 < g.ns(); ++i)
        for (std::size_t j = 1; j + 1 < g.nt(); ++j)
            for (std::size_t k = 0; k < a.dim(); ++k) mx = std::max(mx, std::abs(a.at(i, j, k) - b.at(i, j, k)));
    return mx;
}

}  // namespace

TEST_CASE("grid nodes hit both ends exactly") {
    for (std::size_t n : {2u, 3u, 7u, 33u, 100u}) {
        Grid2 g(n, n + 1);
        CHECK(g.s(0) == 0.0);
        CHECK(g.s(n - 1) == 1.0);
        CHECK(g.t(0) == 0.0);
        CHECK(g.t(n) == 1.0);
        CHECK(g.hs() > 0.0);
        CHECK(g.ht() > 0.0);
    }
    CHECK_THROWS_AS(Grid2(1, 5), InvalidInput);
    CHECK_THROWS_AS(Grid2(5, 0), InvalidInput);
}

TEST_CASE("boundary partition is index based") {
    Grid2 g(4, 5);
    CHECK(g.is_boundary(0, 2));
    CHECK(g.is_boundary(3, 2));
    CHECK(g.is_boundary(1, 0));
    CHECK(g.is_boundary(1, 4));
    CHECK_FALSE(g.is_boundary(1, 1));
    CHECK_FALSE(g.is_boundary(2, 3));
}

TEST_CASE("surface fields reject bad shapes and non-finite values") {
    Grid2 g(3, 3);
    CHECK_THROWS_AS(SurfaceField(g, 0), InvalidInput);
    CHECK_THROWS_AS(SurfaceField(g, 2, std::vector<double>(17, 0.0)), InvalidInput);
    std::vector<double> v(18, 1.0);
    v[5] = std::nan("");
    CHECK_THROWS_AS(SurfaceField(g, 2, v), InvalidInput);
    v[5] = INFINITY;
    CHECK_THROWS_AS(SurfaceField(g, 2, v), InvalidInput);
    SurfaceField ok(g, 2, std::vector<double>(18, 1.0));
    CHECK(ok.all_finite());
    CHECK(ok.index(1, 2, 1) == (1 * 3 + 2) * 2 + 1);
}

TEST_CASE("coons fill reproduces a plane from its edges") {
    Grid2 g(9, 11);
    const auto plane = sample(g, 1, [](double s, double t, std::size_t) { return 2.0 * s + 3.0 * t; });
    const auto c = coons_init(boundary_of(plane));
    CHECK(max_interior_gap(c, plane) <= 1e-14);
}

TEST_CASE("coons fill of constant edges is constant") {
    Grid2 g(6, 6);
    const auto cst = sample(g, 3, [](double, double, std::size_t k) { return 0.25 + static_cast<double>(k); });
    CHECK(coons_init(boundary_of(cst)) == cst);
}

TEST_CASE("coons fill is exact on random bilinear fields") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
        Grid2 g(5 + trial % 4, 4 + trial % 7);
        const auto f = sample(g, 1, [&](double s, double t, std::size_t) { return a + b * s + c * t + d * s * t; });
        CHECK(max_interior_gap(coons_init(boundary_of(f)), f) <= 1e-13);
    }
}

TEST_CASE("coons fill of a separable surface matches it to round-off") {
    // Scherk heights are g(s) + h(t), which the transfinite blend reproduces.
    Grid2 g(9, 9);
    const SurfaceField ex = sample_graph(Scherk{1.0, 0.0, 0.0, 0.0}, g, Window{0.0, 0.5, 0.0, 0.5});
    CHECK(max_interior_gap(coons_init(boundary_of(ex)), ex) <= 1e-13);
}

TEST_CASE("coons fill of a non-separable surface: regression baseline") {
    // Gap between the transfinite fill and arctan(v/u) on [0.5,1]², 9×9 nodes.
    // Frozen from an independent numpy evaluation of the blend formula.
    constexpr double kBaseline = 0.0005691894401841369;
    Grid2 g(9, 9);
    const SurfaceField ex = sample_graph(Helicoid{1.0, 0.0}, g, Window{0.5, 1.0, 0.5, 1.0});
    const double gap = max_interior_gap(coons_init(boundary_of(ex)), ex);
    CHECK(gap == doctest::Approx(kBaseline).epsilon(1e-10));
}

TEST_CASE("coons fill rejects inconsistent corners") {
    Grid2 g(4, 4);
    BoundarySpec b(g, 1);
    CHECK(b.corners_consistent());
    b.edge_s0(0)[0] = 1e-11;  // disagrees with edge t0 at node (0,0)
    CHECK(b.corner_mismatch() == doctest::Approx(1e-11));
    CHECK_THROWS_AS(coons_init(b), InvalidInput);
    b.edge_s0(0)[0] = 5e-13;  // within tolerance
    CHECK_NOTHROW(coons_init(b));
}

TEST_CASE("apply_boundary overwrites edges only") {
    Grid2 g(5, 6);
    const auto plane = sample(g, 2, [](double s, double t, std::size_t k) { return (k + 1.0) * s - t; });
    const BoundarySpec b = boundary_of(plane);
    const SurfaceField out = apply_boundary(SurfaceField(g, 2), b);
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.nt(); ++j)
            for (std::size_t k = 0; k < 2; ++k)
                CHECK(out.at(i, j, k) == (g.is_boundary(i, j) ? plane.at(i, j, k) : 0.0));

    CHECK(apply_boundary(out, b) == out);
    const SurfaceField c = coons_init(b);
    CHECK(apply_boundary(c, b) == c);
}

TEST_CASE("apply_boundary rejects shape mismatch") {
    Grid2 g(5, 5);
    BoundarySpec b(g, 2);
    CHECK_THROWS_AS(apply_boundary(SurfaceField(g, 3), b), InvalidInput);
    CHECK_THROWS_AS(apply_boundary(SurfaceField(Grid2(5, 4), 2), b), InvalidInput);
}

TEST_CASE("grid operations are pure") {
    Grid2 g(8, 9);
    const SurfaceField ex = sample_graph(Helicoid{1.0, 0.3}, g, Window{0.5, 1.0, 0.2, 0.9});
    const BoundarySpec b = boundary_of(ex);
    CHECK(coons_init(b) == coons_init(b));
    CHECK(apply_boundary(ex, b) == ex);
}
