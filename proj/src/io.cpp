#include "wsurf/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>
#include <tuple>
#include <vector>

namespace wsurf {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
    s = trim(s);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidInput("surface CSV line " + std::to_string(line_no) + ": cannot parse '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

void write_surface_csv(std::ostream& os, const SurfaceField& f) {
    const Grid2& g = f.grid();
    os << "i,j,s,t,k,value\n";
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            for (std::size_t k = 0; k < f.dim(); ++k) {
                os << i << ',' << j << ',' << fmt17(g.s(i)) << ',' << fmt17(g.t(j)) << ',' << k << ','
                   << fmt17(f.at(i, j, k)) << '\n';
            }
        }
    }
}

SurfaceField read_surface_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != "i,j,s,t,k,value") {
        throw InvalidInput("surface CSV must start with header i,j,s,t,k,value");
    }
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> entries;
    std::size_t ns = 0, nt = 0, dim = 0, line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split_commas(line);
        if (cols.size() != 6) {
            throw InvalidInput("surface CSV line " + std::to_string(line_no) + ": expected 6 columns");
        }
        const auto i = parse_number<std::size_t>(cols[0], line_no);
        const auto j = parse_number<std::size_t>(cols[1], line_no);
        const auto k = parse_number<std::size_t>(cols[4], line_no);
        const double v = parse_number<double>(cols[5], line_no);
        if (!entries.emplace(std::tuple{i, j, k}, v).second) {
            throw InvalidInput("surface CSV line " + std::to_string(line_no) + ": duplicate entry");
        }
        ns = std::max(ns, i + 1);
        nt = std::max(nt, j + 1);
        dim = std::max(dim, k + 1);
    }
    if (entries.size() != ns * nt * dim || entries.empty()) {
        throw InvalidInput("surface CSV does not cover a full ns x nt x dim block");
    }
    Grid2 grid(ns, nt);
    std::vector<double> values(entries.size());
    std::size_t n = 0;
    for (const auto& [key, v] : entries) values[n++] = v;  // map order is (i, j, k) row-major
    return SurfaceField(grid, dim, std::move(values));
}

nlohmann::json surface_to_json(const SurfaceField& f, const std::string& kind) {
    nlohmann::json j;
    j["ns"] = f.grid().ns();
    j["nt"] = f.grid().nt();
    j["dim"] = f.dim();
    j["values"] = std::vector<double>(f.values().begin(), f.values().end());
    if (!kind.empty()) j["kind"] = kind;
    return j;
}

SurfaceField surface_from_json(const nlohmann::json& j) {
    try {
        const auto ns = j.at("ns").get<std::size_t>();
        const auto nt = j.at("nt").get<std::size_t>();
        const auto dim = j.at("dim").get<std::size_t>();
        auto values = j.at("values").get<std::vector<double>>();
        return SurfaceField(Grid2(ns, nt), dim, std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("surface JSON: ") + e.what());
    }
}

LoadedSurface load_surface(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open surface file " + path.string());
    const std::string ext = path.extension().string();
    if (ext == ".csv") return {read_surface_csv(in), ""};
    if (ext == ".json") {
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw InvalidInput("surface JSON " + path.string() + ": " + e.what());
        }
        std::string kind;
        if (j.contains("kind")) {
            if (!j["kind"].is_string()) throw InvalidInput("surface JSON: kind must be a string");
            kind = j["kind"].get<std::string>();
        }
        return {surface_from_json(j), kind};
    }
    throw InvalidInput("surface file must end in .csv or .json: " + path.string());
}

void save_surface(const std::filesystem::path& path, const SurfaceField& f, const std::string& kind) {
    if (path.extension() == ".csv") {
        std::ostringstream os;
        write_surface_csv(os, f);
        write_text(path, os.str());
    } else if (path.extension() == ".json") {
        write_json(path, surface_to_json(f, kind));
    } else {
        throw InvalidInput("surface file " + path.string() + " must end in .csv or .json");
    }
}

nlohmann::json report_to_json(const SolveReport& r) {
    nlohmann::json j;
    j["converged"] = r.converged;
    j["iters"] = r.iterations;
    j["area_trace"] = r.area_trace;
    j["grad_norm"] = r.grad_norm;
    j["el_residual"] = r.el_residual;
    j["degenerate_cells"] = r.degenerate_cells;
    j["grad_tol"] = r.grad_tol;
    j["final_area"] = r.final_area;
    j["excluded_nodes"] = r.excluded_nodes;
    if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
    return j;
}

void write_boundary_csv(std::ostream& os, const BoundarySpec& b) {
    os << "edge,idx,s,t,k,value\n";
    const Grid2& g = b.grid;
    auto emit = [&](const char* name, std::size_t count, auto st, auto edge) {
        for (std::size_t n = 0; n < count; ++n) {
            const auto [s, t] = st(n);
            const auto v = edge(n);
            for (std::size_t k = 0; k < b.dim; ++k) {
                os << name << ',' << n << ',' << fmt17(s) << ',' << fmt17(t) << ',' << k << ',' << fmt17(v[k])
                   << '\n';
            }
        }
    };
    emit("s0", g.nt(), [&](std::size_t n) { return std::pair{0.0, g.t(n)}; },
         [&](std::size_t n) { return b.edge_s0(n); });
    emit("s1", g.nt(), [&](std::size_t n) { return std::pair{1.0, g.t(n)}; },
         [&](std::size_t n) { return b.edge_s1(n); });
    emit("t0", g.ns(), [&](std::size_t n) { return std::pair{g.s(n), 0.0}; },
         [&](std::size_t n) { return b.edge_t0(n); });
    emit("t1", g.ns(), [&](std::size_t n) { return std::pair{g.s(n), 1.0}; },
         [&](std::size_t n) { return b.edge_t1(n); });
}

void write_coordinate_matrix(std::ostream& os, const SurfaceField& f, std::size_t k) {
    if (k >= f.dim()) throw InvalidInput("coordinate index out of range");
    const Grid2& g = f.grid();
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            if (j) os << ',';
            os << fmt17(f.at(i, j, k));
        }
        os << '\n';
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace wsurf
