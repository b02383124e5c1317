#include "wsurf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsurf {

double SolverConfig::tolerance(const Grid2& grid) const {
    return grad_tol.value_or(1e-8 * grid.hs() * grid.ht());
}

void SolverConfig::validate(std::size_t dim) const {
    if (max_iters < 1) throw InvalidInput("solver max_iters must be >= 1");
    if (grad_tol && !(*grad_tol > 0.0)) throw InvalidInput("solver grad_tol must be positive");
    if (!(c1 > 0.0 && c1 < 1.0)) throw InvalidInput("Armijo constant c1 must lie in (0,1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidInput("backtracking factor must lie in (0,1)");
    if (!(initial_step > 0.0) || !std::isfinite(initial_step)) throw InvalidInput("initial step must be positive");
    if (max_backtracks < 0) throw InvalidInput("max_backtracks must be >= 0");
    if (normal_projection && !free_coords.empty()) {
        throw InvalidInput("normal projection needs every coordinate free");
    }
    if (!fixed_directions.empty()) {
        if (!free_coords.empty()) throw InvalidInput("fixed directions need every coordinate free");
        if (normal_projection) throw InvalidInput("fixed directions and normal projection are exclusive");
        for (const auto& d : fixed_directions) {
            if (d.size() != dim) throw InvalidInput("fixed direction length differs from the surface dimension");
            for (double x : d)
                if (!std::isfinite(x)) throw InvalidInput("fixed direction is not finite");
        }
    }
    for (std::size_t k : free_coords) {
        if (k >= dim) {
            throw InvalidInput("free coordinate " + std::to_string(k) + " out of range for dimension " +
                               std::to_string(dim));
        }
    }
}

namespace {

std::vector<unsigned char> coordinate_mask(std::size_t dim, std::span<const std::size_t> coords) {
    if (coords.empty()) return std::vector<unsigned char>(dim, 1);
    std::vector<unsigned char> mask(dim, 0);
    for (std::size_t k : coords) {
        if (k >= dim) throw InvalidInput("coordinate index " + std::to_string(k) + " out of range");
        mask[k] = 1;
    }
    return mask;
}

// Zero every entry the solver may not move: boundary nodes (already zero in
// the area gradient) and pinned coordinates.
void apply_mask(SurfaceField& g, const std::vector<unsigned char>& mask) {
    auto v = g.values();
    const std::size_t m = g.dim();
    for (std::size_t n = 0; n < v.size(); ++n) {
        if (!mask[n % m]) v[n] = 0.0;
    }
}

// Interior nodes whose four incident cells are all degenerate: their gradient
// is round-off amplified by 1/√ε and carries no information.
std::vector<unsigned char> fully_degenerate_nodes(const AreaEvaluation& ev, const Grid2& g) {
    std::vector<unsigned char> out(g.ns() * g.nt(), 0);
    const std::size_t nct = g.nt() - 1;
    for (std::size_t i = 1; i + 1 < g.ns(); ++i) {
        for (std::size_t j = 1; j + 1 < g.nt(); ++j) {
            out[i * g.nt() + j] = ev.degenerate[(i - 1) * nct + (j - 1)] && ev.degenerate[(i - 1) * nct + j] &&
                                  ev.degenerate[i * nct + (j - 1)] && ev.degenerate[i * nct + j];
        }
    }
    return out;
}

double max_norm(const SurfaceField& v, const std::vector<unsigned char>& skip) {
    const auto x = v.values();
    const std::size_t m = v.dim();
    double mx = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (!skip[n / m]) mx = std::max(mx, std::abs(x[n]));
    }
    return mx;
}

double dot(const SurfaceField& a, const SurfaceField& b) {
    const auto x = a.values(), y = b.values();
    double s = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) s += x[n] * y[n];
    return s;
}

// ⟨a, b⟩_w summed over all entries.
double wdot(const SurfaceField& a, const SurfaceField& b, const AreaConfig& acfg) {
    const auto x = a.values(), y = b.values();
    const std::size_t m = a.dim();
    double s = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) s += acfg.weight(n % m) * x[n] * y[n];
    return s;
}

// w-orthonormal basis by modified Gram-Schmidt; drops directions whose
// remainder is below 1e-10 of their original length.
std::vector<std::vector<double>> orthonormalize(const std::vector<std::vector<double>>& dirs, const AreaConfig& acfg) {
    std::vector<std::vector<double>> basis;
    auto wdot_vec = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += acfg.weight(k) * a[k] * b[k];
        return s;
    };
    for (std::vector<double> d : dirs) {
        const double len0 = std::sqrt(wdot_vec(d, d));
        if (!(len0 > 0.0)) continue;
        for (const auto& e : basis) {
            const double c = wdot_vec(d, e);
            for (std::size_t k = 0; k < d.size(); ++k) d[k] -= c * e[k];
        }
        const double len = std::sqrt(wdot_vec(d, d));
        if (!(len > 1e-10 * len0)) continue;
        for (double& x : d) x /= len;
        basis.push_back(std::move(d));
    }
    return basis;
}

// How the search gradient is restricted beyond the coordinate mask.
struct Gauge {
    bool normal = false;
    std::vector<std::vector<double>> fixed;  // w-orthonormal
};

void project_out(SurfaceField& v, const std::vector<std::vector<double>>& basis, const AreaConfig& acfg) {
    const Grid2& g = v.grid();
    for (std::size_t i = 1; i + 1 < g.ns(); ++i) {
        for (std::size_t j = 1; j + 1 < g.nt(); ++j) {
            auto x = v.node(i, j);
            // The removed part can exceed the remainder by ten orders of
            // magnitude; a second pass clears what the first leaves behind.
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& e : basis) {
                    double c = 0.0;
                    for (std::size_t k = 0; k < x.size(); ++k) c += acfg.weight(k) * x[k] * e[k];
                    for (std::size_t k = 0; k < x.size(); ++k) x[k] -= c * e[k];
                }
            }
        }
    }
}

// Gradient in the w-metric, G = g / w, restricted by the gauge.
SurfaceField metric_gradient(const SurfaceField& f, const SurfaceField& g, const AreaConfig& acfg, const Gauge& gauge) {
    SurfaceField G = g;
    auto v = G.values();
    const std::size_t m = g.dim();
    for (std::size_t n = 0; n < v.size(); ++n) v[n] /= acfg.weight(n % m);
    if (gauge.normal) project_normal(f, G, acfg);
    if (!gauge.fixed.empty()) project_out(G, gauge.fixed, acfg);
    return G;
}

ElResidual el_residual(const SurfaceField& f, const AreaConfig& acfg, const std::vector<unsigned char>& mask,
                       const Gauge& gauge) {
    const AreaEvaluation ev = evaluate_area(f, acfg, true);
    const Grid2& g = f.grid();
    const std::size_t m = f.dim();
    const double cell = g.hs() * g.ht();
    const std::vector<unsigned char> skip = fully_degenerate_nodes(ev, g);
    const SurfaceField G = metric_gradient(f, ev.gradient, acfg, gauge);
    ElResidual r{SurfaceField(g, m), 0.0, 0};
    for (std::size_t i = 1; i + 1 < g.ns(); ++i) {
        for (std::size_t j = 1; j + 1 < g.nt(); ++j) {
            if (skip[i * g.nt() + j]) {
                ++r.excluded;
                continue;
            }
            for (std::size_t k = 0; k < m; ++k) {
                if (!mask[k]) continue;
                const double v = -G.at(i, j, k) / cell;
                r.residual.at(i, j, k) = v;
                r.max_norm = std::max(r.max_norm, std::abs(v));
            }
        }
    }
    return r;
}

// Every cell of f, projected onto the plane of the first two basis vectors,
// must be a convex quadrilateral with the orientation of the first cell.
void check_one_to_one(const SurfaceField& f, const std::vector<std::vector<double>>& basis, const AreaConfig& acfg) {
    if (basis.size() < 2) return;
    const Grid2& g = f.grid();
    auto proj = [&](std::size_t i, std::size_t j) {
        double a = 0.0, b = 0.0;
        const auto x = f.node(i, j);
        for (std::size_t k = 0; k < x.size(); ++k) {
            a += acfg.weight(k) * x[k] * basis[0][k];
            b += acfg.weight(k) * x[k] * basis[1][k];
        }
        return std::pair{a, b};
    };
    double orientation = 0.0;
    for (std::size_t i = 0; i + 1 < g.ns(); ++i) {
        for (std::size_t j = 0; j + 1 < g.nt(); ++j) {
            const std::pair<double, double> q[4] = {proj(i, j), proj(i + 1, j), proj(i + 1, j + 1), proj(i, j + 1)};
            for (int c = 0; c < 4; ++c) {
                const auto& p0 = q[c];
                const auto& p1 = q[(c + 1) % 4];
                const auto& p2 = q[(c + 3) % 4];
                const double cross = (p1.first - p0.first) * (p2.second - p0.second) -
                                     (p1.second - p0.second) * (p2.first - p0.first);
                if (orientation == 0.0) orientation = cross > 0.0 ? 1.0 : -1.0;
                if (!(cross * orientation > 0.0)) {
                    throw InvalidInput("initial surface does not project one-to-one onto the fixed plane (cell (" +
                                       std::to_string(i) + "," + std::to_string(j) + "))");
                }
            }
        }
    }
}

void check_finite(const AreaEvaluation& ev, int iteration) {
    if (!std::isfinite(ev.area)) throw NumericalError(iteration, "total area is not finite");
    if (!ev.gradient.all_finite()) throw NumericalError(iteration, "area gradient is not finite");
}

}  // namespace

void project_normal(const SurfaceField& f, SurfaceField& v, const AreaConfig& acfg) {
    const Grid2& g = f.grid();
    const std::size_t m = f.dim();
    std::vector<double> ts(m), tt(m);
    for (std::size_t i = 1; i + 1 < g.ns(); ++i) {
        for (std::size_t j = 1; j + 1 < g.nt(); ++j) {
            for (std::size_t k = 0; k < m; ++k) {
                ts[k] = (f.at(i + 1, j, k) - f.at(i - 1, j, k)) * 0.5 / g.hs();
                tt[k] = (f.at(i, j + 1, k) - f.at(i, j - 1, k)) * 0.5 / g.ht();
            }
            const Gram gm = gram(ts, tt, acfg);
            auto x = v.node(i, j);
            double xs = 0.0, xt = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                xs += acfg.weight(k) * ts[k] * x[k];
                xt += acfg.weight(k) * tt[k] * x[k];
            }
            const double det = gm.determinant();
            if (det > 1e-12 * gm.ss * gm.tt) {
                const double a = (gm.tt * xs - gm.st * xt) / det;
                const double b = (gm.ss * xt - gm.st * xs) / det;
                for (std::size_t k = 0; k < m; ++k) x[k] -= a * ts[k] + b * tt[k];
            } else if (gm.ss > 0.0 || gm.tt > 0.0) {
                // Tangents (numerically) parallel: remove the longer one only.
                const bool use_s = gm.ss >= gm.tt;
                const auto& t = use_s ? ts : tt;
                const double c = (use_s ? xs : xt) / (use_s ? gm.ss : gm.tt);
                for (std::size_t k = 0; k < m; ++k) x[k] -= c * t[k];
            }
        }
    }
}

ElResidual discrete_el_residual(const SurfaceField& f, const AreaConfig& acfg, std::span<const std::size_t> coords,
                                bool normal_projection) {
    const std::vector<unsigned char> mask = coordinate_mask(f.dim(), coords);
    if (normal_projection && !coords.empty()) {
        throw InvalidInput("normal projection needs every coordinate free");
    }
    return el_residual(f, acfg, mask, Gauge{normal_projection, {}});
}

ElResidual discrete_el_residual(const SurfaceField& f, const AreaConfig& acfg, const SolverConfig& cfg) {
    cfg.validate(f.dim());
    acfg.validate(f.dim());
    return el_residual(f, acfg, coordinate_mask(f.dim(), cfg.free_coords),
                       Gauge{cfg.normal_projection, orthonormalize(cfg.fixed_directions, acfg)});
}

std::vector<std::vector<double>> corner_plane(const BoundarySpec& b, const AreaConfig& acfg) {
    acfg.validate(b.dim);
    const std::size_t ns = b.grid.ns(), m = b.dim;
    const auto c00 = b.edge_t0(0), c10 = b.edge_t0(ns - 1), c01 = b.edge_t1(0), c11 = b.edge_t1(ns - 1);
    std::vector<double> e10(m), e01(m), e11(m), n(m);
    for (std::size_t k = 0; k < m; ++k) {
        e10[k] = c10[k] - c00[k];
        e01[k] = c01[k] - c00[k];
        e11[k] = c11[k] - c00[k];
        n[k] = 0.5 * (c00[k] + c11[k]) - 0.5 * (c10[k] + c01[k]);
    }
    std::vector<std::vector<double>> span = orthonormalize({e10, e01, e11}, acfg);
    if (span.size() < 3) return span;
    const std::vector<std::vector<double>> along = orthonormalize({n}, acfg);
    for (auto& e : span) {
        double c = 0.0;
        for (std::size_t k = 0; k < m; ++k) c += acfg.weight(k) * e[k] * along[0][k];
        for (std::size_t k = 0; k < m; ++k) e[k] -= c * along[0][k];
    }
    return orthonormalize(span, acfg);
}

SolveReport minimize(const SurfaceField& init, const BoundarySpec& b, const SolverConfig& cfg,
                     const AreaConfig& acfg) {
    cfg.validate(init.dim());
    acfg.validate(init.dim());
    if (!(init.grid() == b.grid) || init.dim() != b.dim) {
        throw InvalidInput("initial surface and boundary differ in grid or dimension");
    }
    if (!init.all_finite()) throw NumericalError(0, "initial surface is not finite");
    if (!(apply_boundary(init, b) == init)) throw InvalidInput("initial surface does not carry the boundary values");

    const Grid2& grid = init.grid();
    const std::vector<unsigned char> mask = coordinate_mask(init.dim(), cfg.free_coords);
    const double tol = cfg.tolerance(grid);
    const Gauge gauge{cfg.normal_projection, orthonormalize(cfg.fixed_directions, acfg)};
    check_one_to_one(init, gauge.fixed, acfg);

    SolveReport rep{init, 0, {}, 0.0, 0.0, tol, 0.0, false, 0, 0, {}};
    SurfaceField& f = rep.surface;

    AreaEvaluation ev = evaluate_area(f, acfg, true);
    check_finite(ev, 0);
    apply_mask(ev.gradient, mask);
    rep.area_trace.push_back(ev.area);

    // g: Euclidean gradient, G: search gradient in the w-metric, d: direction.
    SurfaceField g = ev.gradient;
    SurfaceField G = metric_gradient(f, g, acfg, gauge);
    SurfaceField d(grid, init.dim());
    SurfaceField step(grid, init.dim());
    auto steepest = [&] {
        const auto src = G.values();
        auto dv = d.values();
        for (std::size_t n = 0; n < dv.size(); ++n) dv[n] = -src[n];
    };
    steepest();
    double gnorm = max_norm(G, fully_degenerate_nodes(ev, grid));
    bool is_steepest = true;

    while (true) {
        if (gnorm <= tol) {
            rep.converged = true;
            break;
        }
        if (rep.iterations >= cfg.max_iters) {
            rep.diagnostic = "iteration limit " + std::to_string(cfg.max_iters) + " reached";
            break;
        }
        double gd = dot(g, d);
        if (!(gd < 0.0)) {
            steepest();
            is_steepest = true;
            gd = dot(g, d);
        }

        // Armijo backtracking; a failed search in a conjugate direction is
        // retried once along steepest descent.
        double accepted_change = 0.0;
        bool accepted = false;
        while (true) {
            double alpha = cfg.initial_step;
            for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
                const auto dv = d.values();
                auto sv = step.values();
                for (std::size_t n = 0; n < sv.size(); ++n) sv[n] = alpha * dv[n];
                const double change = area_change(f, step, acfg);
                if (!std::isfinite(change)) throw NumericalError(rep.iterations + 1, "trial area is not finite");
                if (change <= cfg.c1 * alpha * gd) {
                    accepted_change = change;
                    accepted = true;
                    break;
                }
                alpha *= cfg.backtrack;
            }
            if (accepted || is_steepest) break;
            steepest();
            is_steepest = true;
            gd = dot(g, d);
        }
        if (!accepted) {
            rep.diagnostic = "line search stalled at iteration " + std::to_string(rep.iterations + 1) +
                             " (gradient norm " + std::to_string(gnorm) + " above tolerance " +
                             std::to_string(tol) + ")";
            break;
        }

        {
            auto fv = f.values();
            const auto sv = step.values();
            for (std::size_t n = 0; n < fv.size(); ++n) fv[n] += sv[n];
        }
        ++rep.iterations;
        // accepted_change < 0 strictly, so the trace cannot increase.
        rep.area_trace.push_back(rep.area_trace.back() + accepted_change);

        ev = evaluate_area(f, acfg, true);
        check_finite(ev, rep.iterations);
        apply_mask(ev.gradient, mask);
        SurfaceField G1 = metric_gradient(f, ev.gradient, acfg, gauge);
        gnorm = max_norm(G1, fully_degenerate_nodes(ev, grid));

        double beta = 0.0;
        if (cfg.method == Method::ConjugateGradient) {
            // Polak-Ribière, clamped at zero: ⟨G₁, G₁ − G₀⟩_w / ⟨G₀, G₀⟩_w
            const double den = wdot(G, G, acfg);
            const double num = wdot(G1, G1, acfg) - wdot(G1, G, acfg);
            beta = den > 0.0 ? std::max(0.0, num / den) : 0.0;
        }
        const auto src = G1.values();
        auto dv = d.values();
        for (std::size_t n = 0; n < dv.size(); ++n) dv[n] = -src[n] + beta * dv[n];
        is_steepest = beta == 0.0;
        g = ev.gradient;
        G = std::move(G1);
    }

    rep.grad_norm = gnorm;
    rep.final_area = ev.area;
    rep.degenerate_cells = ev.degenerate_count;
    const ElResidual el = el_residual(f, acfg, mask, gauge);
    rep.el_residual = el.max_norm;
    rep.excluded_nodes = el.excluded;
    return rep;
}

}  // namespace wsurf
