#include "wsurf/analytic_surfaces.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace wsurf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string at_point(double s, double t) {
    return " at (s,t)=(" + std::to_string(s) + "," + std::to_string(t) + ")";
}

Jet eval_plane(const Plane& p, double s, double t) {
    Jet j;
    j.z = p.a1 * s + p.a2 * t + p.a3;
    j.z_s = p.a1;
    j.z_t = p.a2;
    return j;
}

Jet eval_scherk(const Scherk& p, double s, double t) {
    if (p.c == 0.0) throw DomainError("Scherk surface needs c != 0");
    const double cs = std::cos(p.c * s - p.k1);
    const double ct = std::cos(p.c * t - p.k2);
    if (!(cs > 0.0)) throw DomainError("Scherk predicate cos(c*s - k1) > 0 violated" + at_point(s, t));
    if (!(ct > 0.0)) throw DomainError("Scherk predicate cos(c*t - k2) > 0 violated" + at_point(s, t));
    Jet j;
    j.z = std::log(cs / ct) / p.c + p.offset;
    j.z_s = -std::tan(p.c * s - p.k1);
    j.z_t = std::tan(p.c * t - p.k2);
    j.z_ss = -p.c / (cs * cs);
    j.z_tt = p.c / (ct * ct);
    return j;
}

Jet eval_catenoid(const Catenoid& p, double s, double t) {
    if (!(p.r1 > 0.0)) throw DomainError("catenoid needs r1 > 0");
    if (p.sign != 1 && p.sign != -1) throw DomainError("catenoid sign must be +1 or -1");
    const double r = std::hypot(s, t);
    const double x = r / p.r1;
    if (!(x >= 1.0 + 1e-14)) throw DomainError("catenoid predicate r >= r1 violated" + at_point(s, t));
    const double sg = static_cast<double>(p.sign);
    const double root = std::sqrt((r - p.r1) * (r + p.r1));
    // f(r) = c1 ± r1 arccosh(r/r1): f' = ±r1/√(r²−r1²), f'' = ∓r1 r/(r²−r1²)^{3/2}
    const double f1 = sg * p.r1 / root;
    const double f2 = -sg * p.r1 * r / (root * root * root);
    Jet j;
    j.z = p.c1 + sg * p.r1 * arccosh_guarded(x);
    j.z_s = f1 * s / r;
    j.z_t = f1 * t / r;
    const double r2 = r * r, r3 = r2 * r;
    j.z_ss = f2 * s * s / r2 + f1 * t * t / r3;
    j.z_tt = f2 * t * t / r2 + f1 * s * s / r3;
    j.z_st = f2 * s * t / r2 - f1 * s * t / r3;
    return j;
}

Jet eval_helicoid(const Helicoid& p, double s, double t) {
    if (s == 0.0) throw DomainError("helicoid predicate s != 0 violated" + at_point(s, t));
    const double xi = t / s;
    const double q = 1.0 + xi * xi;
    const double k1 = p.c1 / q;
    const double k2 = -2.0 * p.c1 * xi / (q * q);
    const double xi_s = -t / (s * s), xi_t = 1.0 / s;
    const double xi_ss = 2.0 * t / (s * s * s), xi_st = -1.0 / (s * s);
    Jet j;
    j.z = p.c1 * std::atan(xi) + p.c2;
    j.z_s = k1 * xi_s;
    j.z_t = k1 * xi_t;
    j.z_ss = k2 * xi_s * xi_s + k1 * xi_ss;
    j.z_st = k2 * xi_s * xi_t + k1 * xi_st;
    j.z_tt = k2 * xi_t * xi_t;
    return j;
}

}  // namespace

std::string name_of(const AnalyticSurface& a) {
    return std::visit(overloaded{[](const Plane&) { return std::string("plane"); },
                                 [](const Scherk&) { return std::string("scherk"); },
                                 [](const Catenoid&) { return std::string("catenoid"); },
                                 [](const Helicoid&) { return std::string("helicoid"); }},
                      a);
}

double arccosh_guarded(double x) {
    if (!(x >= 1.0)) throw DomainError("arccosh argument below 1: " + std::to_string(x));
    if (x < 1.0 + 1e-14) return 0.0;
    return std::log(x + std::sqrt((x - 1.0) * (x + 1.0)));
}

Jet eval(const AnalyticSurface& a, double s, double t) {
    return std::visit(overloaded{[&](const Plane& p) { return eval_plane(p, s, t); },
                                 [&](const Scherk& p) { return eval_scherk(p, s, t); },
                                 [&](const Catenoid& p) { return eval_catenoid(p, s, t); },
                                 [&](const Helicoid& p) { return eval_helicoid(p, s, t); }},
                      a);
}

double ms_operator(const Jet& j) {
    return (1.0 + j.z_t * j.z_t) * j.z_ss - 2.0 * j.z_s * j.z_t * j.z_st + (1.0 + j.z_s * j.z_s) * j.z_tt;
}

double ms_residual(const AnalyticSurface& a, double s, double t) { return ms_operator(eval(a, s, t)); }

Jet add_sine_bump(Jet j, double amplitude, double s, double t) {
    constexpr double pi = std::numbers::pi;
    const double ss = std::sin(pi * s), cs = std::cos(pi * s);
    const double st = std::sin(pi * t), ct = std::cos(pi * t);
    j.z += amplitude * ss * st;
    j.z_s += amplitude * pi * cs * st;
    j.z_t += amplitude * pi * ss * ct;
    j.z_ss -= amplitude * pi * pi * ss * st;
    j.z_st += amplitude * pi * pi * cs * ct;
    j.z_tt -= amplitude * pi * pi * ss * st;
    return j;
}

SurfaceField sample_graph(const AnalyticSurface& a, const Grid2& grid, const Window& window, double bump) {
    SurfaceField f(grid, 3);
    for (std::size_t i = 0; i < grid.ns(); ++i) {
        for (std::size_t j = 0; j < grid.nt(); ++j) {
            const double s = grid.s(i), t = grid.t(j);
            const double u = window.u(s), v = window.v(t);
            double z = eval(a, u, v).z;
            if (bump != 0.0) z += bump * std::sin(std::numbers::pi * s) * std::sin(std::numbers::pi * t);
            f.at(i, j, 0) = u;
            f.at(i, j, 1) = v;
            f.at(i, j, 2) = z;
        }
    }
    return f;
}

CovBoundary to_cov_boundary(const AnalyticSurface& a, const Grid2& grid, const Window& window) {
    SurfaceField gamma = sample_graph(a, grid, window);
    const char* coord_names[] = {"sqrt(Sigma_11)", "sqrt(Sigma_22)", "sqrt(Sigma_33)"};
    for (std::size_t i = 0; i < grid.ns(); ++i) {
        for (std::size_t j = 0; j < grid.nt(); ++j) {
            for (std::size_t k = 0; k < 3; ++k) {
                if (!(gamma.at(i, j, k) > 0.0)) {
                    throw InvalidInput(std::string(coord_names[k]) + " = " + std::to_string(gamma.at(i, j, k)) +
                                       " is not positive at node (" + std::to_string(i) + "," + std::to_string(j) +
                                       "); choose a window with positive s,t or a larger " + name_of(a) +
                                       " offset");
                }
            }
        }
    }
    BoundarySpec b = boundary_of(gamma);
    return {std::move(b), DiagonalCovSurface(std::move(gamma))};
}

}  // namespace wsurf
