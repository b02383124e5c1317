#include "wsurf/quantile1d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "wsurf/area_functional.hpp"

namespace wsurf {

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation, |rel err| < 1.15e-9, valid for p <= 0.5.
double acklam_lower(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void check_probability(double z) {
    if (!(z > 0.0 && z < 1.0)) {
        throw InvalidInput("probability must lie in (0,1), got " + std::to_string(z));
    }
}

// Root of an increasing function g on [lo, hi] with g(lo) <= 0 <= g(hi):
// Newton steps, falling back to bisection whenever a step leaves the bracket.
double solve_increasing(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                        double lo, double hi) {
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double gx = g(x);
        if (gx == 0.0) return x;
        if (gx < 0.0) lo = x; else hi = x;
        const double slope = dg(x);
        double next = slope > 0.0 ? x - gx / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double scale = std::max(1.0, std::abs(x));
        if (std::abs(next - x) <= 1e-15 * scale || hi - lo <= 4e-16 * scale) return next;
        x = next;
    }
    return x;
}

}  // namespace

double inverse_normal_cdf(double p) {
    check_probability(p);
    if (p > 0.5) return -inverse_normal_cdf(1.0 - p);  // 1 - p is exact on [0.5, 1)
    double x = acklam_lower(p);
    // Lower tail: Φ(x) carries full relative precision, so the Newton update is clean.
    x -= (normal_cdf(x) - p) / normal_pdf(x);
    return x;
}

Density1D Density1D::gaussian(double mean, double stddev) {
    if (!std::isfinite(mean) || !std::isfinite(stddev) || !(stddev > 0.0)) {
        throw InvalidInput("Gaussian density needs finite mean and stddev > 0");
    }
    return Density1D(Gaussian{{mean, stddev}});
}

Density1D Density1D::mixture(std::vector<WeightedComponent> components) {
    if (components.empty()) throw InvalidInput("mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw InvalidInput("mixture weights must be positive");
        if (!std::isfinite(c.gaussian.mean) || !(c.gaussian.stddev > 0.0) || !std::isfinite(c.gaussian.stddev)) {
            throw InvalidInput("mixture component needs finite mean and stddev > 0");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidInput("mixture weights must sum to 1 (got " + std::to_string(total) + ")");
    }
    return Density1D(Mixture{std::move(components)});
}

Density1D Density1D::tabulated(std::vector<double> x, std::vector<double> pdf) {
    if (x.size() < 2 || x.size() != pdf.size()) {
        throw InvalidInput("tabulated density needs matching x/pdf arrays of length >= 2");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(pdf[i])) throw InvalidInput("tabulated values must be finite");
        if (pdf[i] < 0.0) throw InvalidInput("tabulated pdf must be nonnegative");
        if (i > 0 && !(x[i] > x[i - 1])) throw InvalidInput("tabulated x-grid must be strictly increasing");
    }
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) mass += 0.5 * (pdf[i] + pdf[i + 1]) * (x[i + 1] - x[i]);
    if (!(mass > 0.0)) throw InvalidInput("tabulated pdf has zero mass");
    for (double& p : pdf) p /= mass;

    std::vector<double> cdf(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        cdf[i + 1] = cdf[i] + 0.5 * (pdf[i] + pdf[i + 1]) * (x[i + 1] - x[i]);
    }
    return Density1D(Tabulated{std::move(x), std::move(pdf), std::move(cdf)});
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Mass of the linear pdf piece on [x_i, x] for x inside interval i.
double partial_mass(const Density1D::Tabulated& tab, std::size_t i, double x) {
    const double h = tab.x[i + 1] - tab.x[i];
    const double d = x - tab.x[i];
    return tab.pdf[i] * d + (tab.pdf[i + 1] - tab.pdf[i]) * d * d / (2.0 * h);
}

std::size_t interval_of(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    return static_cast<std::size_t>(std::distance(xs.begin(), it)) - 1;
}

}  // namespace

double Density1D::pdf(double x) const {
    return std::visit(
        overloaded{
            [x](const Gaussian& g) { return normal_pdf((x - g.g.mean) / g.g.stddev) / g.g.stddev; },
            [x](const Mixture& m) {
                double acc = 0.0;
                for (const auto& c : m.components) {
                    acc += c.weight * normal_pdf((x - c.gaussian.mean) / c.gaussian.stddev) / c.gaussian.stddev;
                }
                return acc;
            },
            [x](const Tabulated& t) {
                if (x < t.x.front() || x > t.x.back()) return 0.0;
                if (x == t.x.back()) return t.pdf.back();
                const std::size_t i = interval_of(t.x, x);
                const double a = (x - t.x[i]) / (t.x[i + 1] - t.x[i]);
                return (1.0 - a) * t.pdf[i] + a * t.pdf[i + 1];
            },
        },
        repr_);
}

double Density1D::cdf(double x) const {
    return std::visit(
        overloaded{
            [x](const Gaussian& g) { return normal_cdf((x - g.g.mean) / g.g.stddev); },
            [x](const Mixture& m) {
                double acc = 0.0;
                for (const auto& c : m.components) {
                    acc += c.weight * normal_cdf((x - c.gaussian.mean) / c.gaussian.stddev);
                }
                return acc;
            },
            [x](const Tabulated& t) {
                if (x <= t.x.front()) return 0.0;
                if (x >= t.x.back()) return t.cdf.back();
                const std::size_t i = interval_of(t.x, x);
                return t.cdf[i] + partial_mass(t, i, x);
            },
        },
        repr_);
}

double Density1D::sf(double x) const {
    return std::visit(
        overloaded{
            [x](const Gaussian& g) { return normal_sf((x - g.g.mean) / g.g.stddev); },
            [x](const Mixture& m) {
                double acc = 0.0;
                for (const auto& c : m.components) {
                    acc += c.weight * normal_sf((x - c.gaussian.mean) / c.gaussian.stddev);
                }
                return acc;
            },
            [this, x](const Tabulated& t) { return t.cdf.back() - cdf(x); },
        },
        repr_);
}

double Density1D::quantile(double z) const {
    check_probability(z);
    return std::visit(
        overloaded{
            [z](const Gaussian& g) { return g.g.mean + g.g.stddev * inverse_normal_cdf(z); },
            [this, z](const Mixture& m) {
                const double q = inverse_normal_cdf(z);
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                for (const auto& c : m.components) {
                    const double xc = c.gaussian.mean + c.gaussian.stddev * q;
                    lo = std::min(lo, xc);
                    hi = std::max(hi, xc);
                }
                if (lo == hi) return lo;
                auto dens = [this](double x) { return pdf(x); };
                if (z <= 0.5) {
                    return solve_increasing([this, z](double x) { return cdf(x) - z; }, dens, lo, hi);
                }
                const double upper = 1.0 - z;
                return solve_increasing([this, upper](double x) { return upper - sf(x); }, dens, lo, hi);
            },
            [this, z](const Tabulated& t) {
                const double target = std::min(z, t.cdf.back());
                auto it = std::lower_bound(t.cdf.begin(), t.cdf.end(), target);
                std::size_t i = static_cast<std::size_t>(std::distance(t.cdf.begin(), it));
                i = std::clamp<std::size_t>(i, 1, t.x.size() - 1) - 1;
                const double base = t.cdf[i];
                return solve_increasing([&t, i, base, target](double x) { return base + partial_mass(t, i, x) - target; },
                                        [this](double x) { return pdf(x); }, t.x[i], t.x[i + 1]);
            },
        },
        repr_);
}

QuantileGrid::QuantileGrid(std::size_t m) : m_(m) {
    if (m == 0) throw InvalidInput("quantile grid needs m >= 1");
}

std::vector<double> QuantileGrid::nodes() const {
    std::vector<double> z(m_);
    for (std::size_t k = 0; k < m_; ++k) z[k] = node(k);
    return z;
}

std::vector<double> QuantileGrid::weights() const {
    return std::vector<double>(m_, 1.0 / static_cast<double>(m_));
}

std::vector<double> quantiles(const Density1D& d, const QuantileGrid& qg) {
    std::vector<double> out(qg.size());
    for (std::size_t k = 0; k < qg.size(); ++k) out[k] = d.quantile(qg.node(k));
    return out;
}

QuantileSurface::QuantileSurface(SurfaceField f, QuantileGrid qg) : field(std::move(f)), qgrid(qg) {
    if (field.dim() != qgrid.size()) {
        throw InvalidInput("quantile surface dimension " + std::to_string(field.dim()) +
                           " does not match quantile grid size " + std::to_string(qgrid.size()));
    }
}

namespace {

void check_tau(double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidInput("geodesic parameter must lie in [0,1]");
}

void interpolate_into(std::span<const double> q0, std::span<const double> q1, double tau, std::span<double> out) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - tau) * q0[k] + tau * q1[k];
}

}  // namespace

std::vector<double> geodesic_quantiles(const Density1D& d0, const Density1D& d1, double tau,
                                       const QuantileGrid& qg) {
    check_tau(tau);
    const auto q0 = quantiles(d0, qg);
    const auto q1 = quantiles(d1, qg);
    std::vector<double> out(qg.size());
    interpolate_into(q0, q1, tau, out);
    return out;
}

BoundarySpec boundary_from_corners(const Density1D& c00, const Density1D& c10, const Density1D& c01,
                                   const Density1D& c11, const Grid2& grid, const QuantileGrid& qg) {
    const auto q00 = quantiles(c00, qg);
    const auto q10 = quantiles(c10, qg);
    const auto q01 = quantiles(c01, qg);
    const auto q11 = quantiles(c11, qg);
    BoundarySpec b(grid, qg.size());
    for (std::size_t j = 0; j < grid.nt(); ++j) {
        interpolate_into(q00, q01, grid.t(j), b.edge_s0(j));
        interpolate_into(q10, q11, grid.t(j), b.edge_s1(j));
    }
    for (std::size_t i = 0; i < grid.ns(); ++i) {
        interpolate_into(q00, q10, grid.s(i), b.edge_t0(i));
        interpolate_into(q01, q11, grid.s(i), b.edge_t1(i));
    }
    return b;
}

MonotonicityReport monotonicity_report(const QuantileSurface& q) {
    MonotonicityReport r;
    const Grid2& g = q.field.grid();
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            const auto z = q.field.node(i, j);
            for (std::size_t k = 0; k + 1 < z.size(); ++k) {
                const double gap = z[k + 1] - z[k];
                if (gap < 0.0) {
                    ++r.violations;
                    r.worst_gap = std::min(r.worst_gap, gap);
                }
            }
        }
    }
    return r;
}

ReferenceQuadrature reference_quadrature(const Density1D& reference, std::size_t n, double tail) {
    if (n < 2) throw InvalidInput("reference quadrature needs n >= 2");
    if (!(tail > 0.0 && tail < 0.5)) throw InvalidInput("reference quadrature tail must lie in (0, 0.5)");
    const double lo = reference.quantile(tail);
    const double hi = reference.quantile(1.0 - tail);
    ReferenceQuadrature q;
    q.x.resize(n);
    q.weight.resize(n);
    const double dx = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        q.x[k] = k + 1 == n ? hi : lo + dx * static_cast<double>(k);
        const double end_factor = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
        q.weight[k] = end_factor * reference.pdf(q.x[k]) * dx;
    }
    const double total = std::accumulate(q.weight.begin(), q.weight.end(), 0.0);
    for (double& w : q.weight) w /= total;
    return q;
}

MapTangents transport_map_tangents(const QuantileSurface& q, std::size_t i, std::size_t j,
                                   const Density1D& reference, const ReferenceQuadrature& quad) {
    const CellTangents ct = cell_tangents(q.field, i, j);
    const std::size_t m = q.qgrid.size();
    MapTangents out;
    out.ds.resize(quad.x.size());
    out.dt.resize(quad.x.size());
    for (std::size_t n = 0; n < quad.x.size(); ++n) {
        const double z = reference.cdf(quad.x[n]);
        const double pos = z * static_cast<double>(m) - 0.5;  // fractional node index
        if (pos <= 0.0) {
            out.ds[n] = ct.ds.front();
            out.dt[n] = ct.dt.front();
        } else if (pos >= static_cast<double>(m - 1)) {
            out.ds[n] = ct.ds.back();
            out.dt[n] = ct.dt.back();
        } else {
            const auto k = static_cast<std::size_t>(pos);
            const double a = pos - static_cast<double>(k);
            out.ds[n] = (1.0 - a) * ct.ds[k] + a * ct.ds[k + 1];
            out.dt[n] = (1.0 - a) * ct.dt[k] + a * ct.dt[k + 1];
        }
    }
    return out;
}

double lagrangian_area_element(std::span<const double> ds, std::span<const double> dt,
                               const ReferenceQuadrature& quad) {
    if (ds.size() != quad.weight.size() || dt.size() != quad.weight.size()) {
        throw InvalidInput("map tangents do not match the reference quadrature");
    }
    AreaConfig cfg;
    cfg.epsilon = 0.0;
    cfg.weights = quad.weight;
    return area_element(ds, dt, cfg);
}

}  // namespace wsurf
