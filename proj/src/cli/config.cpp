#include <fstream>
#include <set>

#include "wsurf/cli.hpp"

namespace wsurf::cli {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

double get_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? get_number(j, key, where) : fallback;
}

std::size_t get_size(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
    const json& v = j.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(where + "." + key + " must be a non-negative integer");
    return v.get<std::size_t>();
}

std::vector<double> get_vector(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(where + "." + key + " must be an array");
    std::vector<double> out;
    for (const json& e : j.at(key)) {
        if (!e.is_number()) throw ConfigError(where + "." + key + " must contain numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::string get_string(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ConfigError(where + "." + key + " must be a string");
    return j.at(key).get<std::string>();
}

Problem parse_problem(const std::string& s) {
    if (s == "graph") return Problem::Graph;
    if (s == "density1d") return Problem::Density1d;
    if (s == "gaussian-diag") return Problem::GaussianDiag;
    if (s == "analytic-verify") return Problem::AnalyticVerify;
    throw ConfigError("problem must be one of graph, density1d, gaussian-diag, analytic-verify (got '" + s + "')");
}

SolverConfig parse_solver(const json& j, bool& free_set, std::optional<std::string>& gauge) {
    only_keys(j, "solver", {"max_iters", "grad_tol", "method", "c1", "backtrack", "initial_step", "max_backtracks",
                            "free_coords", "gauge"});
    if (j.contains("gauge")) {
        gauge = get_string(j, "gauge", "solver");
        if (*gauge != "plane" && *gauge != "normal" && *gauge != "none") {
            throw ConfigError("solver.gauge must be plane, normal or none");
        }
    }
    SolverConfig s;
    if (j.contains("max_iters")) {
        if (!j["max_iters"].is_number_integer()) throw ConfigError("solver.max_iters must be an integer");
        s.max_iters = j["max_iters"].get<int>();
    }
    if (j.contains("grad_tol")) s.grad_tol = get_number(j, "grad_tol", "solver");
    if (j.contains("method")) {
        const std::string m = get_string(j, "method", "solver");
        if (m == "cg" || m == "nonlinear-cg") {
            s.method = Method::ConjugateGradient;
        } else if (m == "gd" || m == "gradient-descent") {
            s.method = Method::GradientDescent;
        } else {
            throw ConfigError("solver.method must be cg or gd");
        }
    }
    s.c1 = number_or(j, "c1", s.c1, "solver");
    s.backtrack = number_or(j, "backtrack", s.backtrack, "solver");
    s.initial_step = number_or(j, "initial_step", s.initial_step, "solver");
    if (j.contains("max_backtracks")) {
        if (!j["max_backtracks"].is_number_integer()) throw ConfigError("solver.max_backtracks must be an integer");
        s.max_backtracks = j["max_backtracks"].get<int>();
    }
    if (j.contains("free_coords")) {
        if (!j["free_coords"].is_array()) throw ConfigError("solver.free_coords must be an array");
        for (const json& e : j["free_coords"]) {
            if (!e.is_number_unsigned()) throw ConfigError("solver.free_coords must hold coordinate indices");
            s.free_coords.push_back(e.get<std::size_t>());
        }
        free_set = true;
    }
    if (s.max_iters < 1) throw ConfigError("solver.max_iters must be >= 1");
    if (s.grad_tol && !(*s.grad_tol > 0.0)) throw ConfigError("solver.grad_tol must be positive");
    return s;
}

std::vector<double> parse_cov(const json& j, const std::string& where) {
    only_keys(j, where, {"type", "diag"});
    if (get_string(j, "type", where) != "gaussian_diag") throw ConfigError(where + ".type must be gaussian_diag");
    auto d = get_vector(j, "diag", where);
    if (d.empty()) throw ConfigError(where + ".diag must be non-empty");
    for (double v : d) {
        if (!(v > 0.0)) throw ConfigError(where + ".diag entries must be positive");
    }
    return d;
}

}  // namespace

Density1D parse_density(const json& j) {
    if (!j.is_object()) throw ConfigError("density must be a JSON object");
    const std::string type = get_string(j, "type", "density");
    try {
        if (type == "gaussian") {
            only_keys(j, "gaussian density", {"type", "mean", "std"});
            return Density1D::gaussian(get_number(j, "mean", "density"), get_number(j, "std", "density"));
        }
        if (type == "mixture") {
            only_keys(j, "mixture density", {"type", "components"});
            if (!j.contains("components") || !j["components"].is_array()) {
                throw ConfigError("mixture.components must be an array");
            }
            std::vector<WeightedComponent> comps;
            for (const json& c : j["components"]) {
                only_keys(c, "mixture component", {"weight", "mean", "std"});
                comps.push_back({get_number(c, "weight", "component"),
                                 {get_number(c, "mean", "component"), get_number(c, "std", "component")}});
            }
            return Density1D::mixture(std::move(comps));
        }
        if (type == "tabulated") {
            only_keys(j, "tabulated density", {"type", "x", "pdf"});
            return Density1D::tabulated(get_vector(j, "x", "density"), get_vector(j, "pdf", "density"));
        }
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("invalid ") + type + " density: " + e.what());
    }
    throw ConfigError("density type must be gaussian, mixture or tabulated (got '" + type + "')");
}

OracleSpec parse_oracle(const json& j) {
    if (!j.is_object()) throw ConfigError("oracle must be a JSON object");
    const std::string name = get_string(j, "oracle", "oracle");
    OracleSpec o{Plane{}, Window{}, 0.0};
    const std::string where = "oracle " + name;
    if (name == "plane") {
        only_keys(j, where, {"oracle", "a1", "a2", "a3", "window", "perturb"});
        o.surface = Plane{number_or(j, "a1", 0.0, where), number_or(j, "a2", 0.0, where), number_or(j, "a3", 0.0, where)};
    } else if (name == "scherk") {
        only_keys(j, where, {"oracle", "c", "k1", "k2", "offset", "window", "perturb"});
        Scherk s{number_or(j, "c", 1.0, where), number_or(j, "k1", 0.0, where), number_or(j, "k2", 0.0, where),
                 number_or(j, "offset", 0.0, where)};
        if (s.c == 0.0) throw ConfigError("scherk oracle needs c != 0");
        o.surface = s;
    } else if (name == "catenoid") {
        only_keys(j, where, {"oracle", "c1", "r1", "sign", "window", "perturb"});
        Catenoid c{number_or(j, "c1", 0.0, where), number_or(j, "r1", 1.0, where), +1};
        if (j.contains("sign")) {
            const double sg = get_number(j, "sign", where);
            if (sg != 1.0 && sg != -1.0) throw ConfigError("catenoid sign must be +1 or -1");
            c.sign = static_cast<int>(sg);
        }
        if (!(c.r1 > 0.0)) throw ConfigError("catenoid r1 must be positive");
        o.surface = c;
    } else if (name == "helicoid") {
        only_keys(j, where, {"oracle", "c1", "c2", "window", "perturb"});
        o.surface = Helicoid{number_or(j, "c1", 1.0, where), number_or(j, "c2", 0.0, where)};
    } else {
        throw ConfigError("oracle must be plane, scherk, catenoid or helicoid (got '" + name + "')");
    }
    if (j.contains("window")) {
        const auto w = get_vector(j, "window", where);
        if (w.size() != 4) throw ConfigError(where + ".window must be [s_lo, s_hi, t_lo, t_hi]");
        if (!(w[0] < w[1]) || !(w[2] < w[3])) throw ConfigError(where + ".window bounds must be increasing");
        o.window = Window{w[0], w[1], w[2], w[3]};
    }
    o.perturb = number_or(j, "perturb", 0.0, where);
    return o;
}

std::vector<OracleSpec> default_oracles() {
    return {
        {Plane{2.0, 3.0, 1.0}, Window{0.2, 0.8, 0.2, 0.8}, 0.0},
        {Scherk{1.0, 0.0, 0.0, 2.0}, Window{0.05, 0.45, 0.05, 0.45}, 0.0},
        {Catenoid{0.0, 1.0, +1}, Window{0.8, 2.1, 0.8, 2.1}, 0.0},
        {Helicoid{1.0, 2.0}, Window{0.5, 1.0, 0.5, 1.0}, 0.0},
    };
}

RunConfig parse_config(const json& j) {
    only_keys(j, "config",
              {"problem", "grid", "corners", "oracle", "oracles", "solver", "area", "perturb", "output", "verify"});
    RunConfig c;
    c.problem = parse_problem(get_string(j, "problem", "config"));

    if (j.contains("grid")) {
        const json& g = j["grid"];
        only_keys(g, "grid", {"ns", "nt", "m"});
        if (g.contains("ns")) c.ns = get_size(g, "ns", "grid");
        if (g.contains("nt")) c.nt = get_size(g, "nt", "grid");
        if (g.contains("m")) c.m = get_size(g, "m", "grid");
    }
    if (c.problem != Problem::AnalyticVerify && (c.ns < 3 || c.nt < 3)) {
        throw ConfigError("grid.ns and grid.nt must be >= 3");
    }

    if (j.contains("corners")) {
        const json& cj = j["corners"];
        only_keys(cj, "corners", {"c00", "c10", "c01", "c11"});
        const char* names[] = {"c00", "c10", "c01", "c11"};
        for (const char* n : names) {
            if (!cj.contains(n)) throw ConfigError(std::string("corners is missing '") + n + "'");
        }
        switch (c.problem) {
            case Problem::Density1d:
                c.densities = std::array<Density1D, 4>{parse_density(cj["c00"]), parse_density(cj["c10"]),
                                                       parse_density(cj["c01"]), parse_density(cj["c11"])};
                break;
            case Problem::GaussianDiag: {
                std::array<std::vector<double>, 4> covs;
                for (int k = 0; k < 4; ++k) covs[k] = parse_cov(cj[names[k]], std::string("corners.") + names[k]);
                for (int k = 1; k < 4; ++k) {
                    if (covs[k].size() != covs[0].size()) throw ConfigError("corner diagonals differ in length");
                }
                c.covs = std::move(covs);
                break;
            }
            case Problem::Graph: {
                std::array<double, 4> h{};
                for (int k = 0; k < 4; ++k) {
                    if (!cj[names[k]].is_number()) throw ConfigError("graph corners must be heights");
                    h[k] = cj[names[k]].get<double>();
                }
                c.heights = h;
                break;
            }
            case Problem::AnalyticVerify:
                throw ConfigError("analytic-verify takes oracles, not corners");
        }
    }
    if (j.contains("oracle")) c.oracle = parse_oracle(j["oracle"]);
    if (j.contains("oracles")) {
        if (!j["oracles"].is_array()) throw ConfigError("oracles must be an array");
        for (const json& o : j["oracles"]) c.oracles.push_back(parse_oracle(o));
    }

    if (j.contains("verify")) {
        const json& v = j["verify"];
        only_keys(v, "verify", {"surface", "kind", "tolerances", "samples", "border", "margin"});
        if (v.contains("surface")) c.verify.surface = get_string(v, "surface", "verify");
        if (v.contains("kind")) {
            c.verify.kind = get_string(v, "kind", "verify");
            if (c.verify.kind != "graph" && c.verify.kind != "quantile" && c.verify.kind != "gaussian") {
                throw ConfigError("verify.kind must be graph, quantile or gaussian");
            }
        }
        if (v.contains("tolerances")) {
            const json& t = v["tolerances"];
            only_keys(t, "verify.tolerances", {"ms", "el", "mw"});
            c.verify.ms_tol = number_or(t, "ms", c.verify.ms_tol, "verify.tolerances");
            c.verify.el_tol = number_or(t, "el", c.verify.el_tol, "verify.tolerances");
            if (t.contains("mw")) c.verify.mw_tol = get_number(t, "mw", "verify.tolerances");
        }
        if (v.contains("samples")) c.verify.samples = get_size(v, "samples", "verify");
        if (v.contains("border")) c.verify.border = get_size(v, "border", "verify");
        if (v.contains("margin")) c.verify.margin = get_number(v, "margin", "verify");
        if (c.verify.samples < 2) throw ConfigError("verify.samples must be >= 2");
    }

    // A stored surface carries its own boundary, so corners become optional.
    const bool stored = c.verify.surface.has_value();
    switch (c.problem) {
        case Problem::Density1d:
            if (!c.densities && !stored) throw ConfigError("density1d needs corners c00, c10, c01, c11");
            if (c.m < 2) throw ConfigError("density1d needs grid.m >= 2");
            break;
        case Problem::GaussianDiag:
            if (c.covs && c.oracle) throw ConfigError("gaussian-diag takes corners or oracle, not both");
            if (!stored && !c.covs && !c.oracle) {
                throw ConfigError("gaussian-diag needs corners or an oracle");
            }
            break;
        case Problem::Graph:
            if (c.heights && c.oracle) throw ConfigError("graph takes corners or oracle, not both");
            if (!stored && !c.heights && !c.oracle) {
                throw ConfigError("graph needs corners or an oracle");
            }
            break;
        case Problem::AnalyticVerify:
            if (c.oracle) c.oracles.push_back(*c.oracle);
            if (c.oracles.empty()) c.oracles = default_oracles();
            break;
    }

    if (j.contains("solver")) c.solver = parse_solver(j["solver"], c.free_coords_set, c.gauge);
    if (j.contains("area")) {
        const json& a = j["area"];
        only_keys(a, "area", {"epsilon", "compensated"});
        c.area.epsilon = number_or(a, "epsilon", c.area.epsilon, "area");
        if (!(c.area.epsilon >= 0.0)) throw ConfigError("area.epsilon must be >= 0");
        if (a.contains("compensated")) {
            if (!a["compensated"].is_boolean()) throw ConfigError("area.compensated must be a boolean");
            c.area.compensated = a["compensated"].get<bool>();
        }
    }
    if (j.contains("perturb")) {
        const json& p = j["perturb"];
        only_keys(p, "perturb", {"seed", "amplitude"});
        if (p.contains("seed")) c.perturb.seed = get_size(p, "seed", "perturb");
        c.perturb.amplitude = number_or(p, "amplitude", 0.0, "perturb");
        if (!(c.perturb.amplitude >= 0.0)) throw ConfigError("perturb.amplitude must be >= 0");
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        only_keys(o, "output", {"dir", "formats"});
        if (o.contains("dir")) c.out_dir = get_string(o, "dir", "output");
        if (o.contains("formats")) {
            if (!o["formats"].is_array()) throw ConfigError("output.formats must be an array");
            c.formats.clear();
            for (const json& f : o["formats"]) {
                if (!f.is_string() || (f != "csv" && f != "json")) {
                    throw ConfigError("output.formats entries must be csv or json");
                }
                c.formats.push_back(f.get<std::string>());
            }
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    RunConfig c = parse_config(j);
    // Relative surface paths in the config resolve against the config's directory.
    if (c.verify.surface && c.verify.surface->is_relative()) {
        c.verify.surface = path.parent_path() / *c.verify.surface;
    }
    return c;
}

}  // namespace wsurf::cli
