#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "wsurf/cli.hpp"
#include "wsurf/gaussian.hpp"
#include "wsurf/io.hpp"

namespace wsurf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Assembled {
    BoundarySpec boundary;
    AreaConfig area;
    std::vector<std::size_t> free_coords;
    std::string kind;
    std::optional<SurfaceField> exact;  // analytic surface on the grid, when the boundary came from an oracle
    std::optional<QuantileGrid> qgrid;
};

Assembled assemble(const RunConfig& cfg) {
    const Grid2 grid(cfg.ns, cfg.nt);
    AreaConfig area = cfg.area;
    try {
        switch (cfg.problem) {
            case Problem::Graph: {
                if (cfg.oracle) {
                    SurfaceField exact = sample_graph(cfg.oracle->surface, grid, cfg.oracle->window);
                    BoundarySpec b = boundary_of(exact);
                    return {std::move(b), area, {2}, "graph", std::move(exact), {}};
                }
                const auto& h = *cfg.heights;
                SurfaceField f(grid, 3);
                for (std::size_t i = 0; i < grid.ns(); ++i) {
                    for (std::size_t j = 0; j < grid.nt(); ++j) {
                        const double s = grid.s(i), t = grid.t(j);
                        f.at(i, j, 0) = s;
                        f.at(i, j, 1) = t;
                        f.at(i, j, 2) = (1 - s) * (1 - t) * h[0] + s * (1 - t) * h[1] + (1 - s) * t * h[2] + s * t * h[3];
                    }
                }
                return {boundary_of(f), area, {2}, "graph", {}, {}};
            }
            case Problem::Density1d: {
                const QuantileGrid qg(cfg.m);
                const auto& d = *cfg.densities;
                BoundarySpec b = boundary_from_corners(d[0], d[1], d[2], d[3], grid, qg);
                AreaConfig q = AreaConfig::quantile(cfg.m, area.epsilon);
                q.compensated = area.compensated;
                return {std::move(b), q, {}, "quantile", {}, qg};
            }
            case Problem::GaussianDiag: {
                if (cfg.covs) {
                    const auto& c = *cfg.covs;
                    return {gaussian_boundary_from_corners(c[0], c[1], c[2], c[3], grid), area, {}, "gaussian", {}, {}};
                }
                CovBoundary cb = to_cov_boundary(cfg.oracle->surface, grid, cfg.oracle->window);
                const std::size_t last = cb.surface.dim() - 1;
                return {std::move(cb.boundary), area, {last}, "gaussian", cb.surface.sqrt_coords(), {}};
            }
            case Problem::AnalyticVerify:
                break;
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("oracle window leaves the validity domain: ") + e.what());
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("solve needs problem graph, density1d or gaussian-diag");
}

void perturb_interior(SurfaceField& f, const PerturbSpec& p, const std::vector<std::size_t>& free) {
    if (p.amplitude == 0.0) return;
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> u(-p.amplitude, p.amplitude);
    const Grid2& g = f.grid();
    for (std::size_t i = 1; i + 1 < g.ns(); ++i) {
        for (std::size_t j = 1; j + 1 < g.nt(); ++j) {
            for (std::size_t k = 0; k < f.dim(); ++k) {
                const bool is_free = free.empty() || std::find(free.begin(), free.end(), k) != free.end();
                if (is_free) f.at(i, j, k) += u(rng);
            }
        }
    }
}

json stats_json(const std::vector<double>& v) {
    double mx = 0.0, sum = 0.0, sq = 0.0;
    for (double x : v) {
        mx = std::max(mx, std::abs(x));
        sum += std::abs(x);
        sq += x * x;
    }
    const double n = v.empty() ? 1.0 : static_cast<double>(v.size());
    return {{"max_abs", mx}, {"mean_abs", sum / n}, {"rms", std::sqrt(sq / n)}, {"count", v.size()}};
}

json oracle_gap(const SurfaceField& solved, const SurfaceField& exact, const std::vector<std::size_t>& coords) {
    const Grid2& g = solved.grid();
    json per = json::array();
    double overall = 0.0;
    for (std::size_t k = 0; k < solved.dim(); ++k) {
        if (!coords.empty() && std::find(coords.begin(), coords.end(), k) == coords.end()) continue;
        std::vector<double> diff;
        for (std::size_t i = 1; i + 1 < g.ns(); ++i) {
            for (std::size_t j = 1; j + 1 < g.nt(); ++j) diff.push_back(solved.at(i, j, k) - exact.at(i, j, k));
        }
        json s = stats_json(diff);
        s["coord"] = k;
        overall = std::max(overall, s["max_abs"].get<double>());
        per.push_back(s);
    }
    return {{"max_abs_error", overall}, {"coords", per}, {"ns", g.ns()}, {"nt", g.nt()}};
}

void write_surface_artifacts(const fs::path& dir, const std::vector<std::string>& formats, const SurfaceField& f,
                             const std::string& kind) {
    for (const auto& fmt : formats) save_surface(dir / ("surface." + fmt), f, kind);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Resolve the configured gauge onto `scfg` (whose free_coords are final).
void apply_gauge(SolverConfig& scfg, const std::optional<std::string>& gauge, const BoundarySpec& b,
                 const AreaConfig& area) {
    const std::string mode = gauge.value_or(scfg.free_coords.empty() ? "plane" : "none");
    if (mode != "none" && !scfg.free_coords.empty()) {
        throw ConfigError("solver.gauge " + mode + " needs every coordinate free");
    }
    if (mode == "plane") scfg.fixed_directions = corner_plane(b, area);
    if (mode == "normal") scfg.normal_projection = true;
    try {
        scfg.validate(b.dim);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

int cmd_solve(const RunConfig& cfg) {
    Assembled a = assemble(cfg);
    std::vector<std::size_t> free = cfg.free_coords_set ? cfg.solver.free_coords : a.free_coords;
    SolverConfig scfg = cfg.solver;
    scfg.free_coords = free;
    apply_gauge(scfg, cfg.gauge, a.boundary, a.area);

    SurfaceField init = coons_init(a.boundary);
    perturb_interior(init, cfg.perturb, free);
    if (!scfg.fixed_directions.empty()) {
        // Perturb only across the fixed plane; in-plane offsets would change
        // the gauge rather than the surface.
        const SurfaceField coons = coons_init(a.boundary);
        const auto& basis = scfg.fixed_directions;
        for (std::size_t i = 1; i + 1 < init.grid().ns(); ++i) {
            for (std::size_t j = 1; j + 1 < init.grid().nt(); ++j) {
                auto x = init.node(i, j);
                const auto c = coons.node(i, j);
                for (const auto& e : basis) {
                    double p = 0.0;
                    for (std::size_t k = 0; k < x.size(); ++k) p += a.area.weight(k) * (x[k] - c[k]) * e[k];
                    for (std::size_t k = 0; k < x.size(); ++k) x[k] -= p * e[k];
                }
            }
        }
    }

    const SolveReport rep = minimize(init, a.boundary, scfg, a.area);

    fs::create_directories(cfg.out_dir);
    write_surface_artifacts(cfg.out_dir, cfg.formats, rep.surface, a.kind);
    json rj = report_to_json(rep);
    {
        std::ostringstream os;
        write_boundary_csv(os, a.boundary);
        write_text(cfg.out_dir / "boundary.csv", os.str());
    }

    int status = rep.converged ? kOk : kNotConverged;
    if (a.qgrid) {
        const MonotonicityReport mr = monotonicity_report(QuantileSurface(rep.surface, *a.qgrid));
        write_json(cfg.out_dir / "monotonicity.json", {{"violations", mr.violations}, {"worst_gap", mr.worst_gap}});
        std::cout << "monotonicity violations: " << mr.violations << "\n";
    }
    if (a.exact) {
        const json gap = oracle_gap(rep.surface, *a.exact, free);
        write_json(cfg.out_dir / "oracle_gap.json", gap);
        std::cout << "max interior gap to analytic surface: " << format_double(gap["max_abs_error"].get<double>())
                  << "\n";
    }
    if (a.kind == "gaussian") {
        const auto v = rep.surface.values();
        const bool positive = std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
        if (!positive) {
            rj["degenerate"] = "solved sqrt-covariance coordinate is not positive";
            status = kDegenerate;
        } else {
            try {
                const MwResidual mw = critical_residual_mw(DiagonalCovSurface(rep.surface));
                rj["mw_residual"] = mw.max_norm;
            } catch (const DegenerateError& e) {
                rj["degenerate"] = e.what();
                status = kDegenerate;
            }
        }
    }
    write_json(cfg.out_dir / "report.json", rj);

    std::cout << (rep.converged ? "converged" : "not converged") << " after " << rep.iterations
              << " iterations: area " << format_double(rep.final_area) << ", gradient norm "
              << format_double(rep.grad_norm) << " (tol " << format_double(rep.grad_tol) << "), EL residual "
              << format_double(rep.el_residual) << ", degenerate cells " << rep.degenerate_cells << "\n";
    if (!rep.diagnostic.empty()) std::cerr << rep.diagnostic << "\n";
    if (rj.contains("degenerate")) std::cerr << "degenerate: " << rj["degenerate"].get<std::string>() << "\n";
    return status;
}

int cmd_verify(const RunConfig& cfg) {
    json out;
    bool pass = true;
    if (cfg.problem == Problem::AnalyticVerify) {
        json list = json::array();
        const std::size_t n = cfg.verify.samples;
        for (const OracleSpec& o : cfg.oracles) {
            std::vector<double> res;
            res.reserve(n * n);
            try {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const double u = o.window.u(static_cast<double>(i) / static_cast<double>(n - 1));
                        const double v = o.window.v(static_cast<double>(j) / static_cast<double>(n - 1));
                        Jet jet = eval(o.surface, u, v);
                        if (o.perturb != 0.0) jet = add_sine_bump(jet, o.perturb, u, v);
                        res.push_back(ms_operator(jet));
                    }
                }
            } catch (const DomainError& e) {
                throw ConfigError(name_of(o.surface) + " window: " + e.what());
            }
            json s = stats_json(res);
            const bool ok = s["max_abs"].get<double>() <= cfg.verify.ms_tol;
            pass = pass && ok;
            s["oracle"] = name_of(o.surface);
            s["window"] = {o.window.s_lo, o.window.s_hi, o.window.t_lo, o.window.t_hi};
            s["perturb"] = o.perturb;
            s["tolerance"] = cfg.verify.ms_tol;
            s["pass"] = ok;
            std::cout << name_of(o.surface) << ": max |ms residual| " << format_double(s["max_abs"].get<double>())
                      << (ok ? " PASS" : " FAIL") << "\n";
            list.push_back(s);
        }
        out["ms"] = list;
    } else {
        if (!cfg.verify.surface) throw ConfigError("verify needs verify.surface for grid problems");
        LoadedSurface ls = [&] {
            try {
                return load_surface(*cfg.verify.surface);
            } catch (const InvalidInput& e) {
                throw ConfigError(e.what());
            }
        }();
        std::string kind = cfg.verify.kind.empty() ? ls.kind : cfg.verify.kind;
        if (kind.empty()) {
            kind = cfg.problem == Problem::Density1d ? "quantile"
                   : cfg.problem == Problem::GaussianDiag ? "gaussian"
                                                          : "graph";
        }
        const SurfaceField& f = ls.field;
        AreaConfig area = cfg.area;
        std::vector<std::size_t> coords;
        if (cfg.free_coords_set) {
            coords = cfg.solver.free_coords;
        } else if (kind == "graph") {
            coords = {f.dim() - 1};
        }
        if (kind == "quantile") {
            const bool compensated = area.compensated;
            area = AreaConfig::quantile(f.dim(), area.epsilon);
            area.compensated = compensated;
        }
        SolverConfig restrict;
        restrict.free_coords = coords;
        const ElResidual el = [&] {
            try {
                apply_gauge(restrict, cfg.gauge, boundary_of(f), area);
                return discrete_el_residual(f, area, restrict);
            } catch (const InvalidInput& e) {
                throw ConfigError(e.what());
            }
        }();
        const std::string gauge = restrict.normal_projection ? "normal"
                                  : restrict.fixed_directions.empty() ? "none"
                                                                      : "plane";
        const bool el_ok = el.max_norm <= cfg.verify.el_tol;
        pass = pass && el_ok;
        out["el"] = {{"max_abs", el.max_norm}, {"excluded_nodes", el.excluded}, {"tolerance", cfg.verify.el_tol},
                     {"pass", el_ok}, {"kind", kind},
                     {"gauge", gauge}};
        std::cout << "discrete EL residual " << format_double(el.max_norm) << (el_ok ? " PASS" : " FAIL") << "\n";
        if (kind == "gaussian") {
            MwOptions mo;
            mo.border = cfg.verify.border;
            mo.margin = cfg.verify.margin;
            MwResidual mw = [&] {
                try {
                    return critical_residual_mw(DiagonalCovSurface(f), mo);
                } catch (const DegenerateError&) {
                    throw;
                } catch (const InvalidInput& e) {
                    throw ConfigError(e.what());
                }
            }();
            json m = {{"max_abs", mw.max_norm}, {"window", {mw.i_begin, mw.i_end, mw.j_begin, mw.j_end}}};
            if (cfg.verify.mw_tol) {
                const bool ok = mw.max_norm <= *cfg.verify.mw_tol;
                pass = pass && ok;
                m["tolerance"] = *cfg.verify.mw_tol;
                m["pass"] = ok;
            }
            out["mw"] = m;
            std::cout << "critical-point residual " << format_double(mw.max_norm) << "\n";
        }
    }
    out["pass"] = pass;
    fs::create_directories(cfg.out_dir);
    write_json(cfg.out_dir / "residuals.json", out);
    return pass ? kOk : kVerifyFailed;
}

DensitySnapshot density_snapshot(std::span<const double> z) {
    const std::size_t m = z.size();
    if (m < 3) throw InvalidInput("density reconstruction needs at least 3 quantile nodes");
    DensitySnapshot d{std::vector<double>(z.begin(), z.end()), std::vector<double>(m)};
    const double mm = static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
        double dk;  // ∂_k Z, index spacing 1
        if (k == 0) {
            dk = (-3.0 * z[0] + 4.0 * z[1] - z[2]) / 2.0;
        } else if (k + 1 == m) {
            dk = (3.0 * z[m - 1] - 4.0 * z[m - 2] + z[m - 3]) / 2.0;
        } else {
            dk = (z[k + 1] - z[k - 1]) / 2.0;
        }
        d.density[k] = 1.0 / (mm * dk);
    }
    return d;
}

int cmd_export_plot(const ExportOptions& opts) {
    LoadedSurface ls = [&] {
        try {
            return load_surface(opts.surface);
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
    }();
    const SurfaceField& f = ls.field;
    fs::create_directories(opts.out_dir);
    for (std::size_t k = 0; k < f.dim(); ++k) {
        std::ostringstream os;
        write_coordinate_matrix(os, f, k);
        write_text(opts.out_dir / ("coord_" + std::to_string(k + 1) + ".csv"), os.str());
    }
    if (opts.quantile || ls.kind == "quantile") {
        const Grid2& g = f.grid();
        auto nodes = opts.nodes;
        if (nodes.empty()) nodes = {{0, 0}, {g.ns() - 1, 0}, {0, g.nt() - 1}, {g.ns() - 1, g.nt() - 1}};
        for (const auto& [i, j] : nodes) {
            if (i >= g.ns() || j >= g.nt()) {
                throw ConfigError("snapshot node (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
            }
            const DensitySnapshot d = [&] {
                try {
                    return density_snapshot(f.node(i, j));
                } catch (const InvalidInput& e) {
                    throw ConfigError(e.what());
                }
            }();
            std::ostringstream os;
            os.precision(17);
            os << "x,density\n";
            for (std::size_t k = 0; k < d.x.size(); ++k) os << d.x[k] << ',' << d.density[k] << '\n';
            write_text(opts.out_dir / ("density_" + std::to_string(i) + "_" + std::to_string(j) + ".csv"), os.str());
        }
    }
    std::cout << "wrote " << f.dim() << " coordinate matrices to " << opts.out_dir.string() << "\n";
    return kOk;
}

int run(int argc, char** argv) {
    CLI::App app{"Minimal surfaces in Wasserstein space: solve, verify, export"};
    app.require_subcommand(1);

    std::string config_path, out_dir, surface_path, nodes_arg;
    unsigned threads = 1;
    bool quantile = false;

    auto* solve = app.add_subcommand("solve", "Minimize area for the configured boundary");
    solve->add_option("config", config_path, "Run configuration (JSON)")->required();
    solve->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    solve->add_option("--threads", threads, "Cell evaluation threads")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "Evaluate residuals against tolerances");
    verify->add_option("config", config_path, "Run configuration (JSON)")->required();
    verify->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    verify->add_option("--threads", threads, "Cell evaluation threads")->check(CLI::PositiveNumber);

    auto* exp = app.add_subcommand("export-plot", "Write per-coordinate grids for plotting");
    exp->add_option("surface", surface_path, "Surface file (.csv or .json)")->required();
    exp->add_option("--out", out_dir, "Output directory")->required();
    exp->add_flag("--quantile", quantile, "Treat the surface as quantile vectors and write density snapshots");
    exp->add_option("--nodes", nodes_arg, "Snapshot nodes as i,j;i,j;...");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*exp) {
            ExportOptions opts{surface_path, out_dir, quantile, {}};
            std::stringstream ss(nodes_arg);
            std::string item;
            while (std::getline(ss, item, ';')) {
                if (item.empty()) continue;
                std::size_t i = 0, j = 0;
                char comma = 0;
                std::istringstream is(item);
                if (!(is >> i >> comma >> j) || comma != ',') throw ConfigError("--nodes expects i,j;i,j;...");
                opts.nodes.emplace_back(i, j);
            }
            return cmd_export_plot(opts);
        }
        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.area.threads = threads;
        return *solve ? cmd_solve(cfg) : cmd_verify(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kConfigError;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DegenerateError& e) {
        std::cerr << "degenerate: " << e.what() << "\n";
        return kDegenerate;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace wsurf::cli
