#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dumbbell/config.hpp"
#include "dumbbell/fem.hpp"
#include "dumbbell/runner.hpp"
#include "dumbbell/svg.hpp"

using namespace dumbbell;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.eps_list = {0.1};
    cfg.h_max = 0.12;
    cfg.precision = "double";
    cfg.sweep_tol = 1e-10;
    cfg.decay_stations = 32;
    return cfg;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("config defaults round trip through JSON") {
    ExperimentConfig def;
    std::string text = config_to_json(def);
    ExperimentConfig back = parse_config_text(text);
    CHECK(config_to_json(back) == text);
    CHECK(back.h_max == def.h_max);
    CHECK(back.eps_list == def.eps_list);
    CHECK(back.seed == def.seed);
}

TEST_CASE("config rejects unknown keys with a schema listing") {
    try {
        parse_config_text(R"({"geometry": {"rect1": [0,0,1,1], "bogus": 3}, "junk": {}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("bogus") != std::string::npos);
        CHECK(msg.find("junk") != std::string::npos);
    }
}

TEST_CASE("config rejects bad values") {
    CHECK_THROWS_AS(parse_config_text(R"({"solver": {"bc": "robin"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"solver": {"precision": "half"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"mesh": {"h_max": "big"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("not json at all"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"output": {"formats": ["csv", "xml"]}})"), ConfigError);
}

TEST_CASE("custom bump profile from config") {
    ExperimentConfig cfg = parse_config_text(
        R"({"geometry": {"rho": {"samples": [[-2,1],[-1,1],[-0.4,1.5],[0,2]]}}})");
    DumbbellSpec spec = cfg.spec(0.05);
    CHECK(spec.rho(0.0) == 2.0);
    CHECK(spec.rho(-0.4) == doctest::Approx(1.5));
}

TEST_CASE("mesh command writes declared outputs with manifest hashes") {
    TempDir dir("dumbbell_cli_mesh");
    ExperimentConfig cfg = tiny_config();
    run_command("mesh", cfg, dir.path.string(), 1);

    for (const char* name : {"geometry.json", "mesh.txt", "quality.json", "manifest.json"})
        CHECK(fs::exists(dir.path / name));

    std::string manifest = slurp(dir.path / "manifest.json");
    CHECK(manifest.find("config_hash") != std::string::npos);
    CHECK(manifest.find("\"seed\"") != std::string::npos);
    CHECK(manifest.find("\"version\"") != std::string::npos);
    // every listed output hash matches the file content
    auto j = nlohmann::json::parse(manifest);
    for (const auto& out : j["outputs"]) {
        std::string content = slurp(dir.path / out["path"].get<std::string>());
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(content)));
        CHECK(out["fnv1a64"].get<std::string>() == buf);
    }
}

TEST_CASE("solve command is deterministic byte for byte") {
    TempDir dir_a("dumbbell_cli_solve_a");
    TempDir dir_b("dumbbell_cli_solve_b");
    ExperimentConfig cfg = tiny_config();
    cfg.bc = "neumann";
    cfg.k = 2;
    run_command("solve", cfg, dir_a.path.string(), 1);
    run_command("solve", cfg, dir_b.path.string(), 1);
    for (const char* name : {"eig.json", "vectors.txt", "mesh.txt", "manifest.json"})
        CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
}

TEST_CASE("nodal command requires the Neumann condition") {
    TempDir dir("dumbbell_cli_nodal");
    ExperimentConfig cfg = tiny_config();
    cfg.bc = "dirichlet";
    CHECK_THROWS_AS(run_command("nodal", cfg, dir.path.string(), 1), Error);
    cfg.bc = "neumann";
    run_command("nodal", cfg, dir.path.string(), 1);
    CHECK(fs::exists(dir.path / "nodal.json"));
    CHECK(fs::exists(dir.path / "nodal.svg"));
}

TEST_CASE("unknown command is an operational error") {
    TempDir dir("dumbbell_cli_unknown");
    CHECK_THROWS_AS(run_command("frobnicate", tiny_config(), dir.path.string(), 1), ConfigError);
}

TEST_CASE("svg rendering is valid and deterministic") {
    DumbbellSpec spec = tiny_config().spec(0.1);
    PolygonDomain domain = build_dumbbell(spec);
    MeshOptions mopts;
    mopts.h_max = 0.15;
    mopts.size_field = dumbbell_size_field(spec, 0.15);
    Mesh mesh = triangulate(domain, mopts);
    auto [K, M] = assemble(mesh);
    SolverOptions sopts;
    sopts.k = 1;
    EigenResult eig = fix_sign(solve_eigs(K, M, mesh, BC::Dirichlet, sopts), mesh,
                               SignConvention::GroundStatePositive);

    std::string with_field = render_svg(domain, &mesh, &eig.vectors[0], nullptr, nullptr);
    CHECK(with_field.rfind("<?xml", 0) == 0);
    CHECK(with_field.find("<svg") != std::string::npos);
    CHECK(with_field.find("<polygon") != std::string::npos);
    CHECK(with_field.find("#67001f") != std::string::npos);  // top band present
    CHECK(with_field == render_svg(domain, &mesh, &eig.vectors[0], nullptr, nullptr));

    // outline only when no field and an empty nodal overlay are given
    NodalPath empty;
    std::string outline_only = render_svg(domain, nullptr, nullptr, &empty, nullptr);
    CHECK(outline_only.find("<polygon") == std::string::npos);
    CHECK(outline_only.find("<path") != std::string::npos);
}

TEST_CASE("fmt12 prints at 12 significant digits") {
    CHECK(fmt12(M_PI) == "3.14159265359");
    CHECK(fmt12(0.1) == "0.1");
    CHECK(fmt12(123456789012345.0) == "1.23456789012e+14");
}

TEST_CASE("oracle-check command writes its report") {
    TempDir dir("dumbbell_cli_oracle");
    ExperimentConfig cfg = tiny_config();
    run_command("oracle-check", cfg, dir.path.string(), 1);
    std::string report = slurp(dir.path / "oracle.json");
    auto j = nlohmann::json::parse(report);
    CHECK(j["pass"].get<bool>());
    CHECK(fs::exists(dir.path / "manifest.json"));
}

TEST_CASE("top contour band sits at the field maximum") {
    MeshOptions mopts;
    mopts.h_max = 0.08;
    PolygonDomain square = PolygonDomain::rectangle(0, 0, 1, 1);
    Mesh mesh = triangulate(square, mopts);
    auto [K, M] = assemble(mesh);
    SolverOptions sopts;
    sopts.k = 1;
    EigenResult eig = fix_sign(solve_eigs(K, M, mesh, BC::Dirichlet, sopts), mesh,
                               SignConvention::GroundStatePositive);
    std::string svg = render_svg(square, &mesh, &eig.vectors[0], nullptr, nullptr);
    // all polygons of the highest band lie near the mapped center
    std::size_t group = svg.find("#67001f");
    REQUIRE(group != std::string::npos);
    std::size_t end = svg.find("</g>", group);
    std::size_t pos = group;
    int polys = 0;
    while (true) {
        pos = svg.find("points=\"", pos);
        if (pos == std::string::npos || pos > end) break;
        pos += 8;
        std::istringstream is(svg.substr(pos, svg.find('"', pos) - pos));
        double x, y;
        char comma;
        while (is >> x >> comma >> y) {
            CHECK(std::abs(x - 450.0) < 120.0);  // width 900, margin 5%
            CHECK(std::abs(y - 450.0) < 120.0);
        }
        ++polys;
    }
    CHECK(polys >= 1);
}

#ifdef DUMBBELL_BIN
TEST_CASE("binary exit codes and print-defaults") {
    TempDir dir("dumbbell_cli_bin");
    fs::create_directories(dir.path);
    std::string bin = DUMBBELL_BIN;
    auto run = [&](const std::string& args) {
        int rc = std::system((bin + " " + args + " >" + (dir.path / "stdout.txt").string() +
                              " 2>" + (dir.path / "stderr.txt").string())
                                 .c_str());
        return WEXITSTATUS(rc);
    };
    CHECK(run("--print-defaults") == 0);
    ExperimentConfig parsed = parse_config_text(slurp(dir.path / "stdout.txt"));
    CHECK(parsed.h_max == ExperimentConfig{}.h_max);

    CHECK(run("frobnicate") == 1);

    std::ofstream bad(dir.path / "bad.json");
    bad << "{\"geometry\": {\"bogus\": 1}}";
    bad.close();
    CHECK(run("mesh --config " + (dir.path / "bad.json").string()) == 1);

    // nodal under Dirichlet conditions is an operational error
    std::ofstream cfg_file(dir.path / "cfg.json");
    cfg_file << R"({"solver": {"bc": "dirichlet"}})";
    cfg_file.close();
    CHECK(run("nodal --config " + (dir.path / "cfg.json").string() + " --out " +
              (dir.path / "out").string()) == 1);
}
#endif
