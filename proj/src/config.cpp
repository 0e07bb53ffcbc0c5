#include "dumbbell/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dumbbell/errors.hpp"

namespace dumbbell {

using nlohmann::json;

std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

DumbbellSpec ExperimentConfig::spec(double epsilon) const {
    DumbbellSpec s = DumbbellSpec::rectangles(rect1[0], rect1[1], rect1[2], rect1[3], rect2[0],
                                              rect2[1], rect2[2], rect2[3], epsilon, xi);
    s.connector_samples = connector_samples;
    if (!rho_samples.empty()) s.rho = BumpProfile::from_samples(rho_samples);
    return s;
}

ObstacleShape ExperimentConfig::obstacle() const {
    if (obstacle_shape == "square") return ObstacleShape::square(obstacle_side);
    if (obstacle_shape == "polygon") {
        ObstacleShape s;
        for (const auto& [x, y] : obstacle_vertices) s.vertices.push_back({x, y});
        s.validate();
        return s;
    }
    throw ConfigError("unknown obstacle shape: " + obstacle_shape);
}

namespace {

struct SchemaErrors {
    std::vector<std::string> errors;
    void add(const std::string& e) { errors.push_back(e); }
    void raise_if_any() const {
        if (errors.empty()) return;
        std::ostringstream os;
        os << "config schema errors:";
        for (const auto& e : errors) os << "\n  - " << e;
        throw ConfigError(os.str());
    }
};

void check_keys(const json& j, const std::string& block, std::initializer_list<const char*> keys,
                SchemaErrors& errs) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) known = true;
        if (!known) errs.add("unknown key '" + it.key() + "' in " + block);
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& block,
                SchemaErrors& errs) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        errs.add(std::string("bad value for ") + block + "." + key + ": " + e.what());
    }
}

void read_rect(const json& j, const char* key, std::array<double, 4>& out,
               const std::string& block, SchemaErrors& errs) {
    if (!j.contains(key)) return;
    try {
        auto v = j.at(key).get<std::vector<double>>();
        if (v.size() != 4) throw ConfigError("expected 4 numbers");
        std::copy(v.begin(), v.end(), out.begin());
    } catch (const std::exception& e) {
        errs.add(std::string("bad value for ") + block + "." + key + ": " + e.what());
    }
}

void read_pairs(const json& j, const char* key, std::vector<std::pair<double, double>>& out,
                const std::string& block, SchemaErrors& errs) {
    if (!j.contains(key)) return;
    try {
        out.clear();
        for (const auto& item : j.at(key)) {
            if (!item.is_array() || item.size() != 2) throw ConfigError("expected [a, b] pairs");
            out.emplace_back(item.at(0).get<double>(), item.at(1).get<double>());
        }
    } catch (const std::exception& e) {
        errs.add(std::string("bad value for ") + block + "." + key + ": " + e.what());
    }
}

} // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    SchemaErrors errs;
    check_keys(j, "config", {"geometry", "mesh", "solver", "analysis", "obstacle", "output"}, errs);

    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        check_keys(g, "geometry",
                   {"rect1", "rect2", "xi", "rho", "eps_list", "connector_samples"}, errs);
        read_rect(g, "rect1", cfg.rect1, "geometry", errs);
        read_rect(g, "rect2", cfg.rect2, "geometry", errs);
        read_field(g, "xi", cfg.xi, "geometry", errs);
        read_field(g, "eps_list", cfg.eps_list, "geometry", errs);
        read_field(g, "connector_samples", cfg.connector_samples, "geometry", errs);
        if (g.contains("rho")) {
            const json& r = g["rho"];
            if (r.is_string()) {
                if (r.get<std::string>() != "default")
                    errs.add("geometry.rho must be \"default\" or {\"samples\": [[q, v], ...]}");
            } else if (r.is_object()) {
                check_keys(r, "geometry.rho", {"samples"}, errs);
                read_pairs(r, "samples", cfg.rho_samples, "geometry.rho", errs);
            } else {
                errs.add("geometry.rho must be \"default\" or an object");
            }
        }
    }
    if (j.contains("mesh")) {
        const json& m = j["mesh"];
        check_keys(m, "mesh", {"h_max", "min_angle", "connector_factor"}, errs);
        read_field(m, "h_max", cfg.h_max, "mesh", errs);
        read_field(m, "min_angle", cfg.min_angle_deg, "mesh", errs);
        read_field(m, "connector_factor", cfg.connector_factor, "mesh", errs);
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_keys(s, "solver", {"bc", "k", "tol", "seed", "precision"}, errs);
        read_field(s, "bc", cfg.bc, "solver", errs);
        read_field(s, "k", cfg.k, "solver", errs);
        read_field(s, "tol", cfg.tol, "solver", errs);
        read_field(s, "seed", cfg.seed, "solver", errs);
        read_field(s, "precision", cfg.precision, "solver", errs);
        if (cfg.bc != "dirichlet" && cfg.bc != "neumann")
            errs.add("solver.bc must be dirichlet or neumann");
        if (cfg.precision != "auto" && cfg.precision != "double" && cfg.precision != "quad")
            errs.add("solver.precision must be auto, double, or quad");
    }
    if (j.contains("analysis")) {
        const json& a = j["analysis"];
        check_keys(a, "analysis",
                   {"r1", "r2", "z0", "hotspot_tol_rel", "decay_tol", "decay_stations",
                    "nodal_noise_floor_rel", "sweep_tol"},
                   errs);
        read_field(a, "r1", cfg.r1, "analysis", errs);
        read_field(a, "r2", cfg.r2, "analysis", errs);
        read_field(a, "z0", cfg.z0, "analysis", errs);
        read_field(a, "hotspot_tol_rel", cfg.hotspot_tol_rel, "analysis", errs);
        read_field(a, "decay_tol", cfg.decay_tol, "analysis", errs);
        read_field(a, "decay_stations", cfg.decay_stations, "analysis", errs);
        read_field(a, "nodal_noise_floor_rel", cfg.nodal_noise_floor_rel, "analysis", errs);
        read_field(a, "sweep_tol", cfg.sweep_tol, "analysis", errs);
    }
    if (j.contains("obstacle")) {
        const json& o = j["obstacle"];
        check_keys(o, "obstacle", {"shape", "side", "vertices", "spacing", "clearance"}, errs);
        read_field(o, "shape", cfg.obstacle_shape, "obstacle", errs);
        read_field(o, "side", cfg.obstacle_side, "obstacle", errs);
        read_pairs(o, "vertices", cfg.obstacle_vertices, "obstacle", errs);
        read_field(o, "spacing", cfg.spacing, "obstacle", errs);
        read_field(o, "clearance", cfg.clearance, "obstacle", errs);
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, "output", {"formats"}, errs);
        read_field(o, "formats", cfg.formats, "output", errs);
        for (const auto& f : cfg.formats)
            if (f != "csv" && f != "json" && f != "svg")
                errs.add("output.formats entries must be csv, json, or svg");
    }
    errs.raise_if_any();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["geometry"]["rect1"] = cfg.rect1;
    j["geometry"]["rect2"] = cfg.rect2;
    j["geometry"]["xi"] = cfg.xi;
    if (cfg.rho_samples.empty()) {
        j["geometry"]["rho"] = "default";
    } else {
        json samples = json::array();
        for (const auto& [q, v] : cfg.rho_samples) samples.push_back({q, v});
        j["geometry"]["rho"]["samples"] = samples;
    }
    j["geometry"]["eps_list"] = cfg.eps_list;
    j["geometry"]["connector_samples"] = cfg.connector_samples;
    j["mesh"]["h_max"] = cfg.h_max;
    j["mesh"]["min_angle"] = cfg.min_angle_deg;
    j["mesh"]["connector_factor"] = cfg.connector_factor;
    j["solver"]["bc"] = cfg.bc;
    j["solver"]["k"] = cfg.k;
    j["solver"]["tol"] = cfg.tol;
    j["solver"]["seed"] = cfg.seed;
    j["solver"]["precision"] = cfg.precision;
    j["analysis"]["r1"] = cfg.r1;
    j["analysis"]["r2"] = cfg.r2;
    j["analysis"]["z0"] = cfg.z0;
    j["analysis"]["hotspot_tol_rel"] = cfg.hotspot_tol_rel;
    j["analysis"]["decay_tol"] = cfg.decay_tol;
    j["analysis"]["decay_stations"] = cfg.decay_stations;
    j["analysis"]["nodal_noise_floor_rel"] = cfg.nodal_noise_floor_rel;
    j["analysis"]["sweep_tol"] = cfg.sweep_tol;
    j["obstacle"]["shape"] = cfg.obstacle_shape;
    j["obstacle"]["side"] = cfg.obstacle_side;
    if (!cfg.obstacle_vertices.empty()) {
        json verts = json::array();
        for (const auto& [x, y] : cfg.obstacle_vertices) verts.push_back({x, y});
        j["obstacle"]["vertices"] = verts;
    }
    j["obstacle"]["spacing"] = cfg.spacing;
    j["obstacle"]["clearance"] = cfg.clearance;
    j["output"]["formats"] = cfg.formats;
    return j.dump(2) + "\n";
}

} // namespace dumbbell
