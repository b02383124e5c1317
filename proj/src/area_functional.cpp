#include "wsurf/area_functional.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace wsurf {

AreaConfig AreaConfig::quantile(std::size_t m, double epsilon) {
    AreaConfig cfg;
    cfg.epsilon = epsilon;
    cfg.weights.assign(m, 1.0 / static_cast<double>(m));
    return cfg;
}

void AreaConfig::validate(std::size_t dim) const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidInput("area epsilon must be >= 0");
    if (!weights.empty()) {
        if (weights.size() != dim) {
            throw InvalidInput("area weights have length " + std::to_string(weights.size()) +
                               ", surface dimension is " + std::to_string(dim));
        }
        for (double w : weights) {
            if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("area weights must be positive");
        }
    }
}

CellTangents cell_tangents(const SurfaceField& f, std::size_t i, std::size_t j) {
    const Grid2& g = f.grid();
    if (i + 1 >= g.ns() || j + 1 >= g.nt()) {
        throw InvalidInput("cell (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    }
    const double inv2hs = 0.5 / g.hs();
    const double inv2ht = 0.5 / g.ht();
    CellTangents ct{std::vector<double>(f.dim()), std::vector<double>(f.dim())};
    const auto p00 = f.node(i, j), p10 = f.node(i + 1, j), p01 = f.node(i, j + 1), p11 = f.node(i + 1, j + 1);
    for (std::size_t k = 0; k < f.dim(); ++k) {
        ct.ds[k] = (p10[k] + p11[k] - p00[k] - p01[k]) * inv2hs;
        ct.dt[k] = (p01[k] + p11[k] - p00[k] - p10[k]) * inv2ht;
    }
    return ct;
}

Gram gram(std::span<const double> ds, std::span<const double> dt, const AreaConfig& cfg) {
    Gram gm;
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const double w = cfg.weight(k);
        gm.ss += w * ds[k] * ds[k];
        gm.tt += w * dt[k] * dt[k];
        gm.st += w * ds[k] * dt[k];
    }
    return gm;
}

double area_element(std::span<const double> ds, std::span<const double> dt, const AreaConfig& cfg) {
    const Gram gm = gram(ds, dt, cfg);
    return std::sqrt(std::max(gm.determinant(), 0.0) + cfg.epsilon);
}

namespace {

// Per-cell quantities kept so that the reduction can run in a fixed order.
struct CellBuffers {
    std::size_t dim;
    std::vector<double> area;
    std::vector<double> flux_s;  // ∂A_c/∂ds, cell-major then k
    std::vector<double> flux_t;
    std::vector<unsigned char> degenerate;
};

void evaluate_cells(const SurfaceField& f, const AreaConfig& cfg, bool with_flux, CellBuffers& buf,
                    std::size_t first, std::size_t last) {
    const Grid2& g = f.grid();
    const std::size_t nct = g.nt() - 1;
    const std::size_t m = f.dim();
    const double inv2hs = 0.5 / g.hs();
    const double inv2ht = 0.5 / g.ht();
    std::vector<double> ds(m), dt(m);
    for (std::size_t c = first; c < last; ++c) {
        const std::size_t i = c / nct, j = c % nct;
        const auto p00 = f.node(i, j), p10 = f.node(i + 1, j), p01 = f.node(i, j + 1), p11 = f.node(i + 1, j + 1);
        for (std::size_t k = 0; k < m; ++k) {
            ds[k] = (p10[k] + p11[k] - p00[k] - p01[k]) * inv2hs;
            dt[k] = (p01[k] + p11[k] - p00[k] - p10[k]) * inv2ht;
        }
        const Gram gm = gram(ds, dt, cfg);
        const double det = gm.determinant();
        const double a = std::sqrt(std::max(det, 0.0) + cfg.epsilon);
        buf.area[c] = a;
        buf.degenerate[c] = (det <= 0.0 || det < cfg.epsilon) ? 1 : 0;
        if (!with_flux) continue;
        double* fs = buf.flux_s.data() + c * m;
        double* ft = buf.flux_t.data() + c * m;
        // Below the clamp the derivative is zero; with ε = 0 and det = 0 the
        // element is identically zero and contributes no flux.
        if (det < 0.0 || a == 0.0) {
            std::fill(fs, fs + m, 0.0);
            std::fill(ft, ft + m, 0.0);
            continue;
        }
        const double inv_a = 1.0 / a;
        for (std::size_t k = 0; k < m; ++k) {
            const double w = cfg.weight(k);
            fs[k] = w * (ds[k] * gm.tt - dt[k] * gm.st) * inv_a;
            ft[k] = w * (dt[k] * gm.ss - ds[k] * gm.st) * inv_a;
        }
    }
}

CellBuffers evaluate_all_cells(const SurfaceField& f, const AreaConfig& cfg, bool with_flux) {
    cfg.validate(f.dim());
    const Grid2& g = f.grid();
    const std::size_t ncells = (g.ns() - 1) * (g.nt() - 1);
    CellBuffers buf{f.dim(), std::vector<double>(ncells), {}, {}, std::vector<unsigned char>(ncells)};
    if (with_flux) {
        buf.flux_s.resize(ncells * f.dim());
        buf.flux_t.resize(ncells * f.dim());
    }
    const std::size_t nthreads = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(1, ncells));
    if (nthreads == 1) {
        evaluate_cells(f, cfg, with_flux, buf, 0, ncells);
        return buf;
    }
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    const std::size_t chunk = (ncells + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t first = t * chunk, last = std::min(ncells, first + chunk);
        if (first >= last) break;
        workers.emplace_back([&, first, last] { evaluate_cells(f, cfg, with_flux, buf, first, last); });
    }
    for (auto& w : workers) w.join();
    return buf;
}

double reduce_area(const CellBuffers& buf, const Grid2& g, bool compensated) {
    const double cell = g.hs() * g.ht();
    if (!compensated) {
        double sum = 0.0;
        for (double a : buf.area) sum += a * cell;
        return sum;
    }
    double sum = 0.0, comp = 0.0;
    for (double a : buf.area) {
        const double v = a * cell;
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

SurfaceField scatter_gradient(const CellBuffers& buf, const SurfaceField& f) {
    const Grid2& g = f.grid();
    const std::size_t m = f.dim();
    const std::size_t nct = g.nt() - 1;
    const double cs = 0.5 * g.ht();  // hs·ht · 1/(2hs)
    const double ct = 0.5 * g.hs();
    SurfaceField grad(g, m);
    for (std::size_t i = 0; i + 1 < g.ns(); ++i) {
        for (std::size_t j = 0; j < nct; ++j) {
            const std::size_t c = i * nct + j;
            const double* fs = buf.flux_s.data() + c * m;
            const double* ft = buf.flux_t.data() + c * m;
            auto g00 = grad.node(i, j), g10 = grad.node(i + 1, j), g01 = grad.node(i, j + 1),
                 g11 = grad.node(i + 1, j + 1);
            for (std::size_t k = 0; k < m; ++k) {
                const double a = cs * fs[k], b = ct * ft[k];
                g00[k] += -a - b;
                g10[k] += a - b;
                g01[k] += -a + b;
                g11[k] += a + b;
            }
        }
    }
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            if (g.is_boundary(i, j)) std::ranges::fill(grad.node(i, j), 0.0);
        }
    }
    return grad;
}

}  // namespace

double total_area(const SurfaceField& f, const AreaConfig& cfg) {
    const CellBuffers buf = evaluate_all_cells(f, cfg, false);
    return reduce_area(buf, f.grid(), cfg.compensated);
}

SurfaceField area_gradient(const SurfaceField& f, const AreaConfig& cfg) {
    const CellBuffers buf = evaluate_all_cells(f, cfg, true);
    return scatter_gradient(buf, f);
}

AreaEvaluation evaluate_area(const SurfaceField& f, const AreaConfig& cfg, bool with_gradient) {
    CellBuffers buf = evaluate_all_cells(f, cfg, with_gradient);
    AreaEvaluation ev{reduce_area(buf, f.grid(), cfg.compensated),
                      with_gradient ? scatter_gradient(buf, f) : SurfaceField(f.grid(), f.dim()),
                      std::move(buf.degenerate), 0};
    ev.degenerate_count = static_cast<std::size_t>(std::count(ev.degenerate.begin(), ev.degenerate.end(), 1));
    return ev;
}

double area_change(const SurfaceField& f, const SurfaceField& delta, const AreaConfig& cfg) {
    if (!(f.grid() == delta.grid()) || f.dim() != delta.dim()) {
        throw InvalidInput("area_change: field and increment differ in shape");
    }
    cfg.validate(f.dim());
    const Grid2& g = f.grid();
    const std::size_t m = f.dim();
    const double inv2hs = 0.5 / g.hs();
    const double inv2ht = 0.5 / g.ht();
    std::vector<double> ds(m), dt(m), es(m), et(m);
    auto tangents = [&](const SurfaceField& x, std::size_t i, std::size_t j, std::vector<double>& ts,
                        std::vector<double>& tt) {
        const auto p00 = x.node(i, j), p10 = x.node(i + 1, j), p01 = x.node(i, j + 1), p11 = x.node(i + 1, j + 1);
        for (std::size_t k = 0; k < m; ++k) {
            ts[k] = (p10[k] + p11[k] - p00[k] - p01[k]) * inv2hs;
            tt[k] = (p01[k] + p11[k] - p00[k] - p10[k]) * inv2ht;
        }
    };
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i + 1 < g.ns(); ++i) {
        for (std::size_t j = 0; j + 1 < g.nt(); ++j) {
            tangents(f, i, j, ds, dt);
            tangents(delta, i, j, es, et);
            // Gram increments, every term proportional to the tangent increment.
            double dss = 0.0, dtt = 0.0, dst = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double w = cfg.weight(k);
                dss += w * es[k] * (2.0 * ds[k] + es[k]);
                dtt += w * et[k] * (2.0 * dt[k] + et[k]);
                dst += w * (es[k] * dt[k] + ds[k] * et[k] + es[k] * et[k]);
            }
            const Gram g0 = gram(ds, dt, cfg);
            const double det0 = g0.determinant();
            const double ddet = dss * g0.tt + g0.ss * dtt + dss * dtt - dst * (2.0 * g0.st + dst);
            const double det1 = det0 + ddet;
            const double a0 = std::sqrt(std::max(det0, 0.0) + cfg.epsilon);
            const double a1 = std::sqrt(std::max(det1, 0.0) + cfg.epsilon);
            double da;
            if (det0 >= 0.0 && det1 >= 0.0) {
                da = a0 + a1 > 0.0 ? ddet / (a0 + a1) : 0.0;
            } else {
                da = a1 - a0;
            }
            const double v = da * g.hs() * g.ht();
            const double t = sum + v;
            comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
            sum = t;
        }
    }
    return sum + comp;
}

}  // namespace wsurf
