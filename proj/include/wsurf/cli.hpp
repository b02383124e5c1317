#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsurf/analytic_surfaces.hpp"
#include "wsurf/area_functional.hpp"
#include "wsurf/quantile1d.hpp"
#include "wsurf/solver.hpp"

namespace wsurf::cli {

// Malformed or inconsistent configuration (exit status 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class Problem { Graph, Density1d, GaussianDiag, AnalyticVerify };

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNotConverged = 3, kDegenerate = 4 };

struct OracleSpec {
    AnalyticSurface surface;
    Window window;
    // Amplitude of sin(πs)sin(πt) added to z (verify only).
    double perturb = 0.0;
};

struct PerturbSpec {
    std::uint64_t seed = 0;
    double amplitude = 0.0;
};

struct VerifyOptions {
    std::optional<std::filesystem::path> surface;
    std::string kind;  // graph | quantile | gaussian; overrides the file's own tag
    double ms_tol = 1e-10;
    double el_tol = 1e-6;
    std::optional<double> mw_tol;
    std::size_t samples = 21;
    std::size_t border = 1;
    double margin = 0.0;  // parameter-space margin of the mW window; overrides border
};

struct RunConfig {
    Problem problem = Problem::Graph;
    std::size_t ns = 17, nt = 17, m = 0;

    std::optional<std::array<Density1D, 4>> densities;         // density1d: c00, c10, c01, c11
    std::optional<std::array<std::vector<double>, 4>> covs;    // gaussian-diag corners
    std::optional<std::array<double, 4>> heights;              // graph corners
    std::optional<OracleSpec> oracle;                          // graph / gaussian-diag boundary
    std::vector<OracleSpec> oracles;                           // analytic-verify

    SolverConfig solver;
    bool free_coords_set = false;
    // plane | normal | none. Unset: plane when every coordinate is free,
    // none otherwise.
    std::optional<std::string> gauge;
    AreaConfig area;
    PerturbSpec perturb;

    std::filesystem::path out_dir = ".";
    std::vector<std::string> formats{"csv", "json"};
    VerifyOptions verify;
};

// Throws ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// Standard oracle set used by verify when none is configured.
std::vector<OracleSpec> default_oracles();

OracleSpec parse_oracle(const nlohmann::json& j);
Density1D parse_density(const nlohmann::json& j);

int cmd_solve(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);

struct ExportOptions {
    std::filesystem::path surface;
    std::filesystem::path out_dir;
    bool quantile = false;
    // Nodes for density snapshots; empty means the four corners.
    std::vector<std::pair<std::size_t, std::size_t>> nodes;
};

int cmd_export_plot(const ExportOptions& opts);

// Density reconstructed from one node's quantile vector: x = Z_k, ρ = (1/m)/∂_k Z.
struct DensitySnapshot {
    std::vector<double> x;
    std::vector<double> density;
};

DensitySnapshot density_snapshot(std::span<const double> quantile_values);

// argv entry point; returns the process exit status.
int run(int argc, char** argv);

}  // namespace wsurf::cli
