#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "wsurf/cli.hpp"
#include "wsurf/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
    fs::path dir;
    explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / ("wsurf_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    fs::path write(const std::string& file, const std::string& text) const {
        std::ofstream(dir / file) << text;
        return dir / file;
    }

    int run(const std::string& args) const {
        const std::string cmd = std::string(WSURF_BINARY) + " " + args + " > " + (dir / "stdout.txt").string() +
                                " 2> " + (dir / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    json read_json(const fs::path& rel) const {
        std::ifstream in(dir / rel);
        return json::parse(in);
    }

    std::string read_text(const fs::path& rel) const {
        std::ifstream in(dir / rel);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
};

const char* kMixture = R"({"problem":"density1d","grid":{"ns":7,"nt":7,"m":32},
 "corners":{"c00":{"type":"gaussian","mean":0,"std":1},
 "c10":{"type":"mixture","components":[{"weight":0.5,"mean":-2,"std":0.5},{"weight":0.5,"mean":2,"std":0.5}]},
 "c01":{"type":"gaussian","mean":3,"std":2},
 "c11":{"type":"tabulated","x":[-1,0,1,2,6],"pdf":[0,1,2,1,0]}}})";

}  // namespace

TEST_CASE("graph solve writes its artifacts and converges") {
    Sandbox sb("graph");
    const auto cfg = sb.write("c.json", R"({"problem":"graph","grid":{"ns":17,"nt":17},
        "oracle":{"oracle":"scherk","offset":2,"window":[0.1,0.4,0.1,0.4]}})");
    REQUIRE(sb.run("solve " + cfg.string() + " --out " + (sb.dir / "out").string()) == 0);
    for (const char* f : {"surface.csv", "surface.json", "report.json", "boundary.csv", "oracle_gap.json"})
        CHECK(fs::exists(sb.dir / "out" / f));
    const json rep = sb.read_json("out/report.json");
    CHECK(rep["converged"] == true);
    CHECK(rep["area_trace"].size() == rep["iters"].get<std::size_t>() + 1);
    CHECK(sb.read_json("out/oracle_gap.json")["max_abs_error"].get<double>() < 1e-4);
    const auto csv = wsurf::load_surface(sb.dir / "out" / "surface.csv");
    const auto js = wsurf::load_surface(sb.dir / "out" / "surface.json");
    CHECK(csv.field == js.field);
    CHECK(js.kind == "graph");
}

TEST_CASE("density solve reports monotone quantiles and exports densities") {
    Sandbox sb("density");
    const auto cfg = sb.write("c.json", kMixture);
    REQUIRE(sb.run("solve " + cfg.string() + " --out " + (sb.dir / "out").string()) == 0);
    CHECK(sb.read_json("out/monotonicity.json")["violations"] == 0);
    CHECK(sb.read_json("out/report.json")["converged"] == true);

    REQUIRE(sb.run("export-plot " + (sb.dir / "out" / "surface.json").string() + " --out " +
                   (sb.dir / "plot").string() + " --quantile --nodes \"3,3;0,6\"") == 0);
    CHECK(fs::exists(sb.dir / "plot" / "coord_1.csv"));
    CHECK(fs::exists(sb.dir / "plot" / "coord_32.csv"));
    CHECK(fs::exists(sb.dir / "plot" / "density_3_3.csv"));
    CHECK(fs::exists(sb.dir / "plot" / "density_0_6.csv"));
}

TEST_CASE("verify on a solved surface passes and on a bumped one fails") {
    Sandbox sb("verify");
    const auto cfg = sb.write("c.json", R"({"problem":"graph","grid":{"ns":17,"nt":17},
        "oracle":{"oracle":"scherk","offset":2,"window":[0.1,0.4,0.1,0.4]}})");
    REQUIRE(sb.run("solve " + cfg.string() + " --out " + (sb.dir / "out").string()) == 0);

    const auto ok = sb.write("v.json", R"({"problem":"graph","verify":{"surface":"out/surface.json","tolerances":{"el":1e-5}}})");
    CHECK(sb.run("verify " + ok.string() + " --out " + (sb.dir / "v").string()) == 0);
    CHECK(sb.read_json("v/residuals.json")["pass"] == true);

    auto bumped = wsurf::load_surface(sb.dir / "out" / "surface.json");
    bumped.field.at(8, 8, 2) += 0.01;
    wsurf::save_surface(sb.dir / "bumped.csv", bumped.field);
    const auto bad = sb.write("b.json", R"({"problem":"graph","verify":{"surface":"bumped.csv","kind":"graph"}})");
    CHECK(sb.run("verify " + bad.string() + " --out " + (sb.dir / "b").string()) == 1);
    CHECK(sb.read_json("b/residuals.json")["pass"] == false);
}

TEST_CASE("analytic verify covers the default oracles") {
    Sandbox sb("analytic");
    const auto cfg = sb.write("c.json", R"({"problem":"analytic-verify"})");
    REQUIRE(sb.run("verify " + cfg.string() + " --out " + sb.dir.string()) == 0);
    const json r = sb.read_json("residuals.json");
    CHECK(r["ms"].size() == 4);
    for (const auto& e : r["ms"]) CHECK(e["max_abs"].get<double>() <= 1e-10);

    const auto pert = sb.write("p.json", R"({"problem":"analytic-verify",
        "oracles":[{"oracle":"plane","a1":1,"a2":1,"a3":0,"window":[0,1,0,1],"perturb":0.05}]})");
    CHECK(sb.run("verify " + pert.string() + " --out " + sb.dir.string()) == 1);
}

TEST_CASE("gaussian corner solve reports the critical-point residual") {
    Sandbox sb("gauss");
    const auto cfg = sb.write("c.json", R"({"problem":"gaussian-diag","grid":{"ns":9,"nt":9},
        "corners":{"c00":{"type":"gaussian_diag","diag":[1,1,1]},"c10":{"type":"gaussian_diag","diag":[4,1,4]},
                   "c01":{"type":"gaussian_diag","diag":[1,4,4]},"c11":{"type":"gaussian_diag","diag":[4,4,9]}}})");
    REQUIRE(sb.run("solve " + cfg.string() + " --out " + (sb.dir / "out").string()) == 0);
    const json rep = sb.read_json("out/report.json");
    CHECK(rep["converged"] == true);
    CHECK(rep.contains("mw_residual"));
}

TEST_CASE("zero-mean corners are flagged as degenerate") {
    Sandbox sb("degenerate");
    const auto cfg = sb.write("c.json", R"({"problem":"density1d","grid":{"ns":9,"nt":9,"m":32},
        "corners":{"c00":{"type":"gaussian","mean":0,"std":1},"c10":{"type":"gaussian","mean":0,"std":2},
                   "c01":{"type":"gaussian","mean":0,"std":3},"c11":{"type":"gaussian","mean":0,"std":1.5}}})");
    const int code = sb.run("solve " + cfg.string() + " --out " + (sb.dir / "out").string());
    CHECK((code == 0 || code == 4));
    const json rep = sb.read_json("out/report.json");
    CHECK(rep["degenerate_cells"].get<std::size_t>() > 0);
    CHECK(rep["final_area"].get<double>() <= 1.01 * std::sqrt(1e-12));
}

TEST_CASE("configuration errors exit with code 2") {
    Sandbox sb("config");
    CHECK(sb.run("solve " + (sb.dir / "missing.json").string()) == 2);
    const auto typo = sb.write("t.json", R"({"problem":"graph","grdi":{"ns":9}})");
    CHECK(sb.run("solve " + typo.string()) == 2);
    CHECK(sb.read_text("stderr.txt").find("grdi") != std::string::npos);
    const auto weights = sb.write("w.json", R"({"problem":"density1d","grid":{"ns":5,"nt":5,"m":8},
        "corners":{"c00":{"type":"mixture","components":[{"weight":0.5,"mean":0,"std":1},{"weight":0.4,"mean":1,"std":1}]},
                   "c10":{"type":"gaussian","mean":0,"std":1},"c01":{"type":"gaussian","mean":0,"std":1},
                   "c11":{"type":"gaussian","mean":0,"std":1}}})");
    CHECK(sb.run("solve " + weights.string()) == 2);
    const auto small = sb.write("s.json", R"({"problem":"graph","grid":{"ns":2,"nt":9},"oracle":{"oracle":"plane"}})");
    CHECK(sb.run("solve " + small.string()) == 2);
    const auto domain = sb.write("d.json", R"({"problem":"graph","grid":{"ns":9,"nt":9},
        "oracle":{"oracle":"catenoid","window":[0,0.5,0,0.5]}})");
    CHECK(sb.run("solve " + domain.string()) == 2);
    const auto both = sb.write("b.json", R"({"problem":"graph","grid":{"ns":9,"nt":9},
        "corners":{"c00":0,"c10":1,"c01":1,"c11":2},"oracle":{"oracle":"plane"}})");
    CHECK(sb.run("solve " + both.string()) == 2);
    const auto gauge = sb.write("g.json", R"({"problem":"graph","grid":{"ns":9,"nt":9},
        "oracle":{"oracle":"plane"},"solver":{"gauge":"sideways"}})");
    CHECK(sb.run("solve " + gauge.string()) == 2);
    CHECK(sb.run("bogus") != 0);
}

TEST_CASE("iteration limit exits with code 3") {
    Sandbox sb("limit");
    const auto cfg = sb.write("c.json", R"({"problem":"graph","grid":{"ns":17,"nt":17},
        "oracle":{"oracle":"scherk","offset":2,"window":[0.1,0.4,0.1,0.4]},"solver":{"max_iters":2}})");
    CHECK(sb.run("solve " + cfg.string() + " --out " + (sb.dir / "out").string()) == 3);
    const json rep = sb.read_json("out/report.json");
    CHECK(rep["converged"] == false);
    CHECK(rep["diagnostic"].get<std::string>().find("iteration limit") != std::string::npos);
}

TEST_CASE("config parsing in process") {
    using namespace wsurf::cli;
    const RunConfig c = parse_config(json::parse(R"({"problem":"graph","grid":{"ns":9,"nt":11},
        "oracle":{"oracle":"helicoid","c1":2,"window":[0.5,1,0.5,1]},
        "solver":{"method":"gd","max_iters":10,"c1":0.001}})"));
    CHECK(c.ns == 9);
    CHECK(c.nt == 11);
    CHECK(c.solver.method == wsurf::Method::GradientDescent);
    CHECK(c.solver.max_iters == 10);
    REQUIRE(c.oracle.has_value());
    CHECK(std::get<wsurf::Helicoid>(c.oracle->surface).c1 == 2.0);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"problem":"nope"})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"problem":"graph","solver":{"method":"newton"}})")), ConfigError);
    CHECK(default_oracles().size() == 4);
}
