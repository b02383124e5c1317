#include <cmath>
#include <random>

#include "doctest.h"
#include "wsurf/analytic_surfaces.hpp"
#include "wsurf/quantile1d.hpp"
#include "wsurf/solver.hpp"

using namespace wsurf;

namespace {

SolverConfig graph_mode() {
    SolverConfig c;
    c.free_coords = {2};
    return c;
}

double interior_max_error(const SurfaceField& a, const SurfaceField& b, std::size_t k) {
    double e = 0.0;
    const Grid2& g = a.grid();
    for (std::size_t i = 1; i + 1 < g.ns(); ++i)
        for (std::size_t j = 1; j + 1 < g.nt(); ++j) e = std::max(e, std::abs(a.at(i, j, k) - b.at(i, j, k)));
    return e;
}

bool nonincreasing(const std::vector<double>& v) {
    for (std::size_t n = 1; n < v.size(); ++n)
        if (v[n] > v[n - 1]) return false;
    return true;
}

}  // namespace

TEST_CASE("a plane is already stationary") {
    Grid2 g(9, 9);
    const auto plane = sample_graph(Plane{1.0, 1.0, 0.0}, g, Window{});
    const auto b = boundary_of(plane);
    const auto init = coons_init(b);
    const auto rep = minimize(init, b, graph_mode(), AreaConfig{});
    CHECK(rep.converged);
    CHECK(rep.iterations <= 2);
    CHECK(interior_max_error(rep.surface, init, 2) <= 1e-12);
    CHECK(rep.final_area == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(rep.diagnostic.empty());
}

TEST_CASE("graph solve approaches the Scherk surface") {
    const Scherk sc{1.0, 0.0, 0.0, 2.0};
    const Window w{0.1, 0.4, 0.1, 0.4};
    double prev = 0.0;
    for (std::size_t n : {9u, 17u}) {
        Grid2 g(n, n);
        const auto exact = sample_graph(sc, g, w);
        const auto b = boundary_of(exact);
        const auto rep = minimize(coons_init(b), b, graph_mode(), AreaConfig{});
        CHECK(rep.converged);
        CHECK(rep.grad_norm <= rep.grad_tol);
        CHECK(nonincreasing(rep.area_trace));
        CHECK(rep.area_trace.size() == static_cast<std::size_t>(rep.iterations) + 1);
        CHECK(rep.final_area == doctest::Approx(rep.area_trace.back()).epsilon(1e-12));
        const double err = interior_max_error(rep.surface, exact, 2);
        if (prev > 0.0) CHECK(prev / err > 3.0);
        prev = err;
    }
}

TEST_CASE("solves start anywhere with the same boundary and agree") {
    Grid2 g(11, 11);
    const auto exact = sample_graph(Scherk{1.0, 0.0, 0.0, 2.0}, g, Window{0.1, 0.4, 0.1, 0.4});
    const auto b = boundary_of(exact);
    auto bumped = sample_graph(Scherk{1.0, 0.0, 0.0, 2.0}, g, Window{0.1, 0.4, 0.1, 0.4}, 0.3);
    SolverConfig cfg = graph_mode();
    const auto r1 = minimize(coons_init(b), b, cfg, AreaConfig{});
    const auto r2 = minimize(bumped, b, cfg, AreaConfig{});
    CHECK(r1.converged);
    CHECK(r2.converged);
    CHECK(interior_max_error(r1.surface, r2.surface, 2) <= 1e-8);
    CHECK(r2.area_trace.front() > r2.final_area);
}

TEST_CASE("gradient descent and conjugate gradient reach the same surface") {
    Grid2 g(9, 9);
    const auto exact = sample_graph(Scherk{1.0, 0.0, 0.0, 2.0}, g, Window{0.1, 0.4, 0.1, 0.4});
    const auto b = boundary_of(exact);
    SolverConfig gd = graph_mode(), cg = graph_mode();
    gd.method = Method::GradientDescent;
    gd.max_iters = 20000;
    const auto rg = minimize(coons_init(b), b, gd, AreaConfig{});
    const auto rc = minimize(coons_init(b), b, cg, AreaConfig{});
    CHECK(rg.converged);
    CHECK(rc.converged);
    CHECK(rc.iterations < rg.iterations);
    CHECK(interior_max_error(rg.surface, rc.surface, 2) <= 1e-8);
    CHECK(nonincreasing(rg.area_trace));
}

TEST_CASE("pinned coordinates and the boundary are never moved") {
    Grid2 g(9, 9);
    const auto init = sample_graph(Scherk{1.0, 0.0, 0.0, 2.0}, g, Window{0.1, 0.4, 0.1, 0.4}, 0.1);
    const auto b = boundary_of(init);
    const auto rep = minimize(init, b, graph_mode(), AreaConfig{});
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.nt(); ++j) {
            CHECK(rep.surface.at(i, j, 0) == init.at(i, j, 0));
            CHECK(rep.surface.at(i, j, 1) == init.at(i, j, 1));
            if (g.is_boundary(i, j)) CHECK(rep.surface.at(i, j, 2) == init.at(i, j, 2));
        }
}

TEST_CASE("solves are deterministic") {
    Grid2 g(9, 9);
    const auto init = sample_graph(Helicoid{1.0, 0.0}, g, Window{0.5, 1.0, 0.5, 1.0}, 0.05);
    const auto b = boundary_of(init);
    const auto r1 = minimize(init, b, graph_mode(), AreaConfig{});
    const auto r2 = minimize(init, b, graph_mode(), AreaConfig{});
    CHECK(r1.surface == r2.surface);
    CHECK(r1.area_trace == r2.area_trace);
}

TEST_CASE("quantile surfaces between mixtures converge in either gauge") {
    Grid2 g(9, 9);
    QuantileGrid qg(16);
    const auto b = boundary_from_corners(
        Density1D::mixture({{0.5, {-2.0, 0.5}}, {0.5, {2.0, 0.5}}}), Density1D::gaussian(0.0, 1.0),
        Density1D::gaussian(1.0, 2.0), Density1D::mixture({{0.3, {-1.0, 0.3}}, {0.7, {1.5, 0.8}}}), g, qg);
    const AreaConfig acfg = AreaConfig::quantile(qg.size());
    const auto init = coons_init(b);

    SolverConfig plane;
    plane.fixed_directions = corner_plane(b, acfg);
    REQUIRE(plane.fixed_directions.size() == 2);
    const auto rp = minimize(init, b, plane, acfg);
    CHECK(rp.converged);
    CHECK(rp.final_area < rp.area_trace.front());
    CHECK(nonincreasing(rp.area_trace));
    CHECK(monotonicity_report(QuantileSurface(rp.surface, qg)).violations == 0);
    CHECK(discrete_el_residual(rp.surface, acfg, plane).max_norm <=
          rp.grad_tol / (g.hs() * g.ht() * acfg.weight(0)) * 1.0000001);

    SolverConfig normal;
    normal.normal_projection = true;
    normal.max_iters = 20000;
    const auto rn = minimize(init, b, normal, acfg);
    CHECK(rn.converged);
    CHECK(nonincreasing(rn.area_trace));
    CHECK(monotonicity_report(QuantileSurface(rn.surface, qg)).violations == 0);
    const auto el = discrete_el_residual(rn.surface, acfg, {}, true);
    CHECK(el.max_norm <= rn.grad_tol / (g.hs() * g.ht() * acfg.weight(0)) * 1.0000001);

    // Both gauges approximate the same surface with differently placed nodes,
    // so the discrete areas agree to discretization order only.
    CHECK(rn.final_area == doctest::Approx(rp.final_area).epsilon(1e-4));
}

TEST_CASE("the corner plane sees a convex quadrilateral") {
    // A skew quadrilateral whose projection on the plane of its diagonals is
    // not convex.
    Grid2 g(5, 5);
    const std::vector<std::vector<double>> c{{0.2, 0.5, 0.0}, {2.0, 0.5, 0.3}, {0.5, 1.6, 1.0}, {3.3, 0.4, -0.8}};
    SurfaceField f(g, 3);
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.nt(); ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                const double s = g.s(i), t = g.t(j);
                f.at(i, j, k) = (1 - s) * (1 - t) * c[0][k] + s * (1 - t) * c[1][k] + (1 - s) * t * c[2][k] + s * t * c[3][k];
            }
    const auto b = boundary_of(f);
    const auto plane = corner_plane(b, AreaConfig{});
    REQUIRE(plane.size() == 2);
    CHECK(std::abs(plane[0][0] * plane[1][0] + plane[0][1] * plane[1][1] + plane[0][2] * plane[1][2]) <= 1e-14);
    // Projected corners, in boundary order, turn the same way at every corner.
    auto proj = [&](const std::vector<double>& p) {
        double a = 0.0, b2 = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            a += p[k] * plane[0][k];
            b2 += p[k] * plane[1][k];
        }
        return std::pair{a, b2};
    };
    const auto p0 = proj(c[0]), p1 = proj(c[1]), p3 = proj(c[3]), p2 = proj(c[2]);
    const std::pair<double, double> ring[4] = {p0, p1, p3, p2};
    int pos = 0;
    for (int n = 0; n < 4; ++n) {
        const auto& a = ring[n];
        const auto& bb = ring[(n + 1) % 4];
        const auto& cc = ring[(n + 2) % 4];
        const double cross = (bb.first - a.first) * (cc.second - bb.second) - (bb.second - a.second) * (cc.first - bb.first);
        pos += cross > 0.0 ? 1 : -1;
    }
    CHECK(std::abs(pos) == 4);

    SolverConfig cfg;
    cfg.fixed_directions = plane;
    const auto rep = minimize(coons_init(b), b, cfg, AreaConfig{});
    CHECK(rep.converged);
    CHECK(rep.final_area < rep.area_trace.front());

    // A plane the quadrilateral folds over on is refused up front.
    SolverConfig bad;
    bad.fixed_directions = {{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    auto folded = f;
    folded.at(2, 2, 0) = 5.0;
    CHECK_THROWS_AS(minimize(folded, b, bad, AreaConfig{}), InvalidInput);
}

TEST_CASE("coplanar and collinear corners") {
    Grid2 g(5, 5);
    const auto plane = sample_graph(Plane{1.0, 2.0, 0.0}, g, Window{});
    CHECK(corner_plane(boundary_of(plane), AreaConfig{}).size() == 2);
    SurfaceField line(g, 3);
    for (std::size_t i = 0; i < g.ns(); ++i)
        for (std::size_t j = 0; j < g.nt(); ++j)
            for (std::size_t k = 0; k < 3; ++k) line.at(i, j, k) = (g.s(i) + g.t(j)) * (k + 1.0);
    CHECK(corner_plane(boundary_of(line), AreaConfig{}).size() == 1);
}

TEST_CASE("iteration limit is reported, not thrown") {
    Grid2 g(17, 17);
    const auto exact = sample_graph(Scherk{1.0, 0.0, 0.0, 2.0}, g, Window{0.1, 0.4, 0.1, 0.4});
    const auto b = boundary_of(exact);
    SolverConfig cfg = graph_mode();
    cfg.max_iters = 3;
    const auto rep = minimize(coons_init(b), b, cfg, AreaConfig{});
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 3);
    CHECK(rep.diagnostic.find("iteration limit") != std::string::npos);
    CHECK(nonincreasing(rep.area_trace));
}

TEST_CASE("discrete EL residual") {
    Grid2 g(9, 7);
    const AreaConfig acfg;

    SUBCASE("vanishes on a plane") {
        const auto plane = sample_graph(Plane{2.0, -1.0, 0.5}, g, Window{0.0, 2.0, 0.0, 1.0});
        CHECK(discrete_el_residual(plane, acfg).max_norm <= 1e-12);
    }

    SUBCASE("is the scaled negative gradient") {
        const auto f = sample_graph(Helicoid{1.0, 0.0}, g, Window{0.5, 1.0, 0.5, 1.0}, 0.1);
        const auto el = discrete_el_residual(f, acfg);
        const auto grad = area_gradient(f, acfg);
        for (std::size_t n = 0; n < grad.values().size(); ++n)
            CHECK(el.residual.values()[n] == doctest::Approx(-grad.values()[n] / (g.hs() * g.ht())));
        const std::size_t z_only[] = {2};
        const auto ez = discrete_el_residual(f, acfg, z_only);
        for (std::size_t i = 0; i < g.ns(); ++i)
            for (std::size_t j = 0; j < g.nt(); ++j) {
                CHECK(ez.residual.at(i, j, 0) == 0.0);
                CHECK(ez.residual.at(i, j, 2) == el.residual.at(i, j, 2));
            }
    }
}

TEST_CASE("normal projection removes tangential components") {
    Grid2 g(9, 9);
    const auto f = sample_graph(Scherk{1.0, 0.0, 0.0, 2.0}, g, Window{0.1, 0.4, 0.1, 0.4}, 0.1);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SurfaceField v(g, 3);
    for (double& x : v.values()) x = u(rng);
    project_normal(f, v, AreaConfig{});
    for (std::size_t i = 1; i + 1 < g.ns(); ++i)
        for (std::size_t j = 1; j + 1 < g.nt(); ++j) {
            double ds = 0.0, dt = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                ds += v.at(i, j, k) * (f.at(i + 1, j, k) - f.at(i - 1, j, k));
                dt += v.at(i, j, k) * (f.at(i, j + 1, k) - f.at(i, j - 1, k));
            }
            CHECK(std::abs(ds) <= 1e-14);
            CHECK(std::abs(dt) <= 1e-14);
        }
}

TEST_CASE("solver input validation") {
    Grid2 g(5, 5);
    const auto f = sample_graph(Plane{1.0, 0.0, 0.0}, g, Window{});
    const auto b = boundary_of(f);
    SolverConfig cfg;
    cfg.normal_projection = true;
    cfg.free_coords = {2};
    CHECK_THROWS_AS(minimize(f, b, cfg, AreaConfig{}), InvalidInput);
    cfg = SolverConfig{};
    cfg.free_coords = {3};
    CHECK_THROWS_AS(minimize(f, b, cfg, AreaConfig{}), InvalidInput);
    cfg = SolverConfig{};
    cfg.c1 = 1.5;
    CHECK_THROWS_AS(minimize(f, b, cfg, AreaConfig{}), InvalidInput);
    cfg = SolverConfig{};
    cfg.max_iters = 0;
    CHECK_THROWS_AS(minimize(f, b, cfg, AreaConfig{}), InvalidInput);
    cfg = SolverConfig{};
    cfg.fixed_directions = {{1.0, 0.0}};
    CHECK_THROWS_AS(minimize(f, b, cfg, AreaConfig{}), InvalidInput);
    cfg.fixed_directions = {{1.0, 0.0, 0.0}};
    cfg.normal_projection = true;
    CHECK_THROWS_AS(minimize(f, b, cfg, AreaConfig{}), InvalidInput);
    cfg.normal_projection = false;
    cfg.free_coords = {2};
    CHECK_THROWS_AS(minimize(f, b, cfg, AreaConfig{}), InvalidInput);
    auto off = f;
    off.at(0, 2, 2) += 1e-3;
    CHECK_THROWS_AS(minimize(off, b, SolverConfig{}, AreaConfig{}), InvalidInput);
    CHECK_THROWS_AS(minimize(SurfaceField(g, 2), b, SolverConfig{}, AreaConfig{}), InvalidInput);
    CHECK(SolverConfig{}.tolerance(Grid2(11, 6)) == doctest::Approx(1e-8 * 0.1 * 0.2));
}
