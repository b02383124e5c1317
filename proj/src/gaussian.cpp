#include "wsurf/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsurf {

namespace {

void require_positive(const SurfaceField& f, const char* what) {
    const auto v = f.values();
    for (std::size_t n = 0; n < v.size(); ++n) {
        if (!(v[n] > 0.0) || !std::isfinite(v[n])) {
            const std::size_t node = n / f.dim();
            throw InvalidInput(std::string(what) + " must be strictly positive; entry " + std::to_string(n % f.dim()) +
                               " at node (" + std::to_string(node / f.grid().nt()) + "," +
                               std::to_string(node % f.grid().nt()) + ") is " + std::to_string(v[n]));
        }
    }
}

}  // namespace

DiagonalCovSurface::DiagonalCovSurface(SurfaceField sqrt_coords) : gamma_(std::move(sqrt_coords)) {
    require_positive(gamma_, "sqrt-covariance coordinates");
}

SurfaceField DiagonalCovSurface::covariances() const {
    SurfaceField sigma = gamma_;
    for (double& v : sigma.values()) v *= v;
    return sigma;
}

DiagonalCovSurface sqrt_coords(const SurfaceField& sigma_diag) {
    require_positive(sigma_diag, "diagonal covariances");
    SurfaceField gamma = sigma_diag;
    for (double& v : gamma.values()) v = std::sqrt(v);
    return DiagonalCovSurface(std::move(gamma));
}

std::vector<double> gaussian_geodesic_diag(std::span<const double> sig0, std::span<const double> sig1, double tau) {
    if (sig0.size() != sig1.size()) throw InvalidInput("covariance diagonals differ in length");
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidInput("geodesic parameter must lie in [0,1]");
    std::vector<double> out(sig0.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!(sig0[k] > 0.0) || !(sig1[k] > 0.0)) throw InvalidInput("covariance diagonals must be positive");
        if (tau == 0.0) { out[k] = sig0[k]; continue; }
        if (tau == 1.0) { out[k] = sig1[k]; continue; }
        const double r = (1.0 - tau) * std::sqrt(sig0[k]) + tau * std::sqrt(sig1[k]);
        out[k] = r * r;
    }
    return out;
}

BoundarySpec gaussian_boundary_from_corners(std::span<const double> c00, std::span<const double> c10,
                                            std::span<const double> c01, std::span<const double> c11,
                                            const Grid2& grid) {
    const std::size_t n = c00.size();
    if (n == 0 || c10.size() != n || c01.size() != n || c11.size() != n) {
        throw InvalidInput("corner covariance diagonals must be non-empty and equal length");
    }
    auto roots = [](std::span<const double> c) {
        std::vector<double> r(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (!(c[k] > 0.0) || !std::isfinite(c[k])) throw InvalidInput("corner covariances must be positive");
            r[k] = std::sqrt(c[k]);
        }
        return r;
    };
    const auto r00 = roots(c00), r10 = roots(c10), r01 = roots(c01), r11 = roots(c11);
    auto lerp = [n](const std::vector<double>& a, const std::vector<double>& b, double tau, std::span<double> out) {
        for (std::size_t k = 0; k < n; ++k) out[k] = (1.0 - tau) * a[k] + tau * b[k];
    };
    BoundarySpec b(grid, n);
    for (std::size_t j = 0; j < grid.nt(); ++j) {
        lerp(r00, r01, grid.t(j), b.edge_s0(j));
        lerp(r10, r11, grid.t(j), b.edge_s1(j));
    }
    for (std::size_t i = 0; i < grid.ns(); ++i) {
        lerp(r00, r10, grid.s(i), b.edge_t0(i));
        lerp(r01, r11, grid.s(i), b.edge_t1(i));
    }
    return b;
}

SurfaceField finite_difference(const SurfaceField& f, Direction dir) {
    const Grid2& g = f.grid();
    const bool along_s = dir == Direction::S;
    const std::size_t n = along_s ? g.ns() : g.nt();
    if (n < 3) throw InvalidInput("finite differences need at least 3 nodes per direction");
    const double h = along_s ? g.hs() : g.ht();
    auto val = [&](std::size_t a, std::size_t b, std::size_t k) {
        return along_s ? f.at(a, b, k) : f.at(b, a, k);
    };
    SurfaceField out(g, f.dim());
    const std::size_t other = along_s ? g.nt() : g.ns();
    for (std::size_t b = 0; b < other; ++b) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t k = 0; k < f.dim(); ++k) {
                double d;
                if (a == 0) {
                    d = (-3.0 * val(0, b, k) + 4.0 * val(1, b, k) - val(2, b, k)) / (2.0 * h);
                } else if (a + 1 == n) {
                    d = (3.0 * val(n - 1, b, k) - 4.0 * val(n - 2, b, k) + val(n - 3, b, k)) / (2.0 * h);
                } else {
                    d = (val(a + 1, b, k) - val(a - 1, b, k)) / (2.0 * h);
                }
                (along_s ? out.at(a, b, k) : out.at(b, a, k)) = d;
            }
        }
    }
    return out;
}

SurfaceField lyapunov_velocity(const DiagonalCovSurface& surf, Direction dir) {
    const SurfaceField sigma = surf.covariances();
    SurfaceField a = finite_difference(sigma, dir);
    const auto sv = sigma.values();
    auto av = a.values();
    for (std::size_t n = 0; n < av.size(); ++n) av[n] /= 2.0 * sv[n];
    return a;
}

namespace {

struct ResidualWindow {
    std::size_t i0, i1, j0, j1;  // half-open
};

ResidualWindow residual_window(const Grid2& g, const MwOptions& opts) {
    std::size_t bs = opts.border, bt = opts.border;
    if (opts.margin != 0.0) {
        if (!(opts.margin > 0.0 && opts.margin < 0.5)) throw InvalidInput("residual margin must lie in (0, 0.5)");
        auto nodes_inside = [&](std::size_t n) {
            const double h = 1.0 / static_cast<double>(n - 1);
            return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opts.margin / h - 1e-9)));
        };
        bs = nodes_inside(g.ns());
        bt = nodes_inside(g.nt());
    }
    if (bs == 0 || bt == 0) throw InvalidInput("residual border must be >= 1 (central stencils)");
    if (2 * bs >= g.ns() || 2 * bt >= g.nt()) {
        throw InvalidInput("residual window leaves no nodes on a " + std::to_string(g.ns()) + "x" +
                           std::to_string(g.nt()) + " grid");
    }
    return {bs, g.ns() - bs, bt, g.nt() - bt};
}

}  // namespace

CriticalFields critical_fields(const DiagonalCovSurface& surf, const MwOptions& opts) {
    const Grid2& g = surf.grid();
    const std::size_t n = surf.dim();
    const ResidualWindow w = residual_window(g, opts);
    const SurfaceField sigma = surf.covariances();
    CriticalFields cf{lyapunov_velocity(surf, Direction::S), lyapunov_velocity(surf, Direction::T),
                      SurfaceField(g, n), SurfaceField(g, n), SurfaceField(g, 1)};
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            const auto sg = sigma.node(i, j);
            const auto as = cf.a_s.node(i, j), at = cf.a_t.node(i, j);
            double ps = 0.0, pt = 0.0, q = 0.0;  // tr(ΣA_s²), tr(ΣA_t²), ½tr(Σ(A_sA_t+A_tA_s))
            for (std::size_t k = 0; k < n; ++k) {
                ps += sg[k] * as[k] * as[k];
                pt += sg[k] * at[k] * at[k];
                q += sg[k] * as[k] * at[k];
            }
            const double jv = std::sqrt(std::max(ps * pt - q * q, 0.0));
            cf.j.at(i, j, 0) = jv;
            const bool feeds_residual = i + 1 >= w.i0 && i <= w.i1 && j + 1 >= w.j0 && j <= w.j1;
            if (!(jv > opts.j_min)) {
                if (feeds_residual) throw DegenerateError(i, j, "area element J below threshold");
                continue;
            }
            const auto ss = cf.s_s.node(i, j), st = cf.s_t.node(i, j);
            for (std::size_t k = 0; k < n; ++k) {
                ss[k] = (as[k] * pt - at[k] * q) / (2.0 * jv);
                st[k] = (at[k] * ps - as[k] * q) / (2.0 * jv);
            }
        }
    }
    return cf;
}

MwResidual critical_residual_mw(const DiagonalCovSurface& surf, const MwOptions& opts) {
    const Grid2& g = surf.grid();
    const std::size_t n = surf.dim();
    const ResidualWindow w = residual_window(g, opts);
    const CriticalFields cf = critical_fields(surf, opts);
    const SurfaceField sigma = surf.covariances();
    MwResidual r{SurfaceField(g, n), 0.0, w.i0, w.i1, w.j0, w.j1};
    const double inv2hs = 0.5 / g.hs(), inv2ht = 0.5 / g.ht();
    for (std::size_t i = w.i0; i < w.i1; ++i) {
        for (std::size_t j = w.j0; j < w.j1; ++j) {
            const auto sg = sigma.node(i, j);
            const auto as = cf.a_s.node(i, j), at = cf.a_t.node(i, j);
            double ps = 0.0, pt = 0.0, q = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                ps += sg[k] * as[k] * as[k];
                pt += sg[k] * at[k] * at[k];
                q += sg[k] * as[k] * at[k];
            }
            const double jv = cf.j.at(i, j, 0);
            for (std::size_t k = 0; k < n; ++k) {
                const double dss = (cf.s_s.at(i + 1, j, k) - cf.s_s.at(i - 1, j, k)) * inv2hs;
                const double dst = (cf.s_t.at(i, j + 1, k) - cf.s_t.at(i, j - 1, k)) * inv2ht;
                const double source =
                    0.5 / jv * (as[k] * as[k] * pt + at[k] * at[k] * ps - 2.0 * as[k] * at[k] * q);
                const double res = dss + dst + source;
                r.residual.at(i, j, k) = res;
                r.max_norm = std::max(r.max_norm, std::abs(res));
            }
        }
    }
    return r;
}

}  // namespace wsurf
