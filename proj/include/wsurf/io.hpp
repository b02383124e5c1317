#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "wsurf/grid_surface.hpp"
#include "wsurf/solver.hpp"

namespace wsurf {

// Long-form `i,j,s,t,k,value`, one row per entry, values at 17 significant digits.
void write_surface_csv(std::ostream& os, const SurfaceField& f);
SurfaceField read_surface_csv(std::istream& is);

// {ns, nt, dim, values}; `kind` is added when non-empty.
nlohmann::json surface_to_json(const SurfaceField& f, const std::string& kind = "");
SurfaceField surface_from_json(const nlohmann::json& j);

struct LoadedSurface {
    SurfaceField field;
    std::string kind;  // empty when the file does not say
};

// Format chosen by extension (.csv or .json). Throws InvalidInput on malformed input.
LoadedSurface load_surface(const std::filesystem::path& path);
void save_surface(const std::filesystem::path& path, const SurfaceField& f, const std::string& kind = "");

// {converged, iters, area_trace, grad_norm, el_residual, degenerate_cells, ...}
nlohmann::json report_to_json(const SolveReport& r);

// `edge,idx,s,t,k,value` with edge ∈ {s0, s1, t0, t1}.
void write_boundary_csv(std::ostream& os, const BoundarySpec& b);

// ns rows × nt columns of coordinate k.
void write_coordinate_matrix(std::ostream& os, const SurfaceField& f, std::size_t k);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace wsurf
