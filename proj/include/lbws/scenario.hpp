#pragma once

#include "lbws/coarse_space.hpp"
#include "lbws/common.hpp"
#include "lbws/materials.hpp"
#include "lbws/schwarz.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace lbws {

struct LaserSpec {
    bool enabled = true;
    std::array<double, 2> center{5.0, 5.0};  // initial xy position, mm
    double radius = 2.0;                     // mm
    double rate = 14400.0;                   // deg C / s
    double melt_temperature = 1460.0;        // deg C
    double init_duration = 0.1;              // s the laser holds its initial position
    double velocity = 16.67;                 // mm/s along +x after initialization
};

struct LoadSpec {
    enum class Interpret { strain, displacement };
    bool enabled = true;
    double eps22 = 0.03;
    double eps22_rate = 0.06;  // 1/s
    double start_time = 0.0;   // s
    Interpret interpret = Interpret::strain;
};

struct Tolerances {
    double newton_abs = 1e-4;
    int newton_max_iter = 25;
    double gmres_rel = 1e-6;
    double gmres_abs = 1e-10;
    int gmres_max_iter = 2000;
    int gmres_restart = 200;
};

/// One coarse-space combination of the comparison matrix.
struct CoarseCombo {
    CoarseVariant displacement = CoarseVariant::gdsw_star;
    CoarseVariant temperature = CoarseVariant::rgdsw;
    bool rotations = true;

    std::string name() const {
        std::string s = to_string(displacement);
        s += rotations ? "(T+R)-" : "(T)-";
        s += to_string(temperature);
        return s;
    }
};

struct Scenario {
    std::array<double, 3> extent{10.0, 10.0, 10.0};
    std::array<int, 3> cells{18, 18, 18};
    std::array<int, 3> grid{3, 3, 3};
    int overlap = 1;
    bool two_level = true;
    FirstLevelKind first_level = FirstLevelKind::restricted;
    RecyclePolicy recycle = RecyclePolicy::reuse_all;
    CoarseConfig coarse;
    double dt = 1e-3;
    int steps = 5;
    double initial_temperature = 20.0;
    bool welding_bcs = true;
    LaserSpec laser;
    LoadSpec load;
    Tolerances tolerances;
    int threads = 1;
    MaterialTable materials = steel_1_4301();
    std::vector<CoarseCombo> compare_combinations;

    void validate() const {
        if (!(dt > 0.0)) throw configuration_error("scenario: dt must be positive");
        if (steps < 0) throw configuration_error("scenario: steps must be >= 0");
        if (!(laser.radius > 0.0)) throw configuration_error("scenario: laser radius must be positive");
        if (laser.init_duration < 0.0)
            throw configuration_error("scenario: laser initialization duration must be >= 0");
        if (overlap < 0) throw configuration_error("scenario: overlap must be >= 0");
        materials.validate();
    }
};

/// The paper-style comparison matrix: five combinations with rotations, the
/// same five with translations only.
inline std::vector<CoarseCombo> default_compare_matrix() {
    std::vector<CoarseCombo> combos;
    const std::array<std::pair<CoarseVariant, CoarseVariant>, 5> pairs{{
        {CoarseVariant::gdsw, CoarseVariant::gdsw},
        {CoarseVariant::gdsw, CoarseVariant::rgdsw},
        {CoarseVariant::gdsw_star, CoarseVariant::gdsw_star},
        {CoarseVariant::gdsw_star, CoarseVariant::rgdsw},
        {CoarseVariant::rgdsw, CoarseVariant::rgdsw},
    }};
    for (bool rot : {true, false})
        for (const auto& [u, t] : pairs) combos.push_back({u, t, rot});
    return combos;
}

namespace detail {

inline CoarseVariant parse_variant(const std::string& s) {
    if (s == "GDSW" || s == "gdsw") return CoarseVariant::gdsw;
    if (s == "GDSW*" || s == "gdsw*" || s == "gdsw_star") return CoarseVariant::gdsw_star;
    if (s == "RGDSW" || s == "rgdsw") return CoarseVariant::rgdsw;
    throw configuration_error("unknown coarse variant '" + s + "' (GDSW, GDSW*, RGDSW)");
}

inline ParamCurve parse_curve(const nlohmann::json& arr, const char* name) {
    ParamCurve curve;
    for (const auto& pair : arr) {
        curve.temperatures.push_back(pair.at(0).get<double>());
        curve.values.push_back(pair.at(1).get<double>());
    }
    curve.validate(name);
    return curve;
}

template <class T, std::size_t N>
void read_array(const nlohmann::json& j, const char* key, std::array<T, N>& out) {
    if (!j.contains(key)) return;
    const auto& arr = j.at(key);
    if (arr.size() != N) throw configuration_error(std::string("config: '") + key + "' needs " +
                                                   std::to_string(N) + " entries");
    for (std::size_t i = 0; i < N; ++i) out[i] = arr.at(i).get<T>();
}

} // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario sc;
    if (j.contains("geometry")) {
        detail::read_array(j["geometry"], "extent", sc.extent);
        detail::read_array(j["geometry"], "cells", sc.cells);
    }
    if (j.contains("decomposition")) {
        detail::read_array(j["decomposition"], "grid", sc.grid);
        sc.overlap = j["decomposition"].value("overlap", sc.overlap);
    }
    if (j.contains("schwarz")) {
        const auto& s = j["schwarz"];
        sc.two_level = s.value("two_level", sc.two_level);
        const std::string level = s.value("first_level", std::string("restricted"));
        if (level == "restricted") sc.first_level = FirstLevelKind::restricted;
        else if (level == "additive") sc.first_level = FirstLevelKind::additive;
        else throw configuration_error("config: first_level must be 'restricted' or 'additive'");
        const std::string recycle = s.value("recycle", std::string("reuse-all"));
        if (recycle == "reuse-all") sc.recycle = RecyclePolicy::reuse_all;
        else if (recycle == "reuse-phi") sc.recycle = RecyclePolicy::reuse_phi;
        else if (recycle == "rebuild-all") sc.recycle = RecyclePolicy::rebuild_all;
        else throw configuration_error("config: recycle must be 'reuse-all', 'reuse-phi' or 'rebuild-all'");
    }
    if (j.contains("coarse")) {
        const auto& c = j["coarse"];
        if (c.contains("displacement")) sc.coarse.displacement = detail::parse_variant(c["displacement"]);
        if (c.contains("temperature")) sc.coarse.temperature = detail::parse_variant(c["temperature"]);
        sc.coarse.rotations = c.value("rotations", sc.coarse.rotations);
        sc.coarse.truncation_tol = c.value("truncation", sc.coarse.truncation_tol);
        if (c.contains("rotation_center")) {
            std::array<double, 3> center{};
            detail::read_array(c, "rotation_center", center);
            sc.coarse.rotation_center = center;
        }
    }
    if (j.contains("time")) {
        sc.dt = j["time"].value("dt", sc.dt);
        sc.steps = j["time"].value("steps", sc.steps);
    }
    sc.initial_temperature = j.value("initial_temperature", sc.initial_temperature);
    sc.welding_bcs = j.value("welding_bcs", sc.welding_bcs);
    if (j.contains("laser")) {
        const auto& l = j["laser"];
        sc.laser.enabled = l.value("enabled", sc.laser.enabled);
        detail::read_array(l, "center", sc.laser.center);
        sc.laser.radius = l.value("radius", sc.laser.radius);
        sc.laser.rate = l.value("rate", sc.laser.rate);
        sc.laser.melt_temperature = l.value("melt_temperature", sc.laser.melt_temperature);
        sc.laser.init_duration = l.value("init_duration", sc.laser.init_duration);
        sc.laser.velocity = l.value("velocity", sc.laser.velocity);
    }
    if (j.contains("load")) {
        const auto& l = j["load"];
        sc.load.enabled = l.value("enabled", sc.load.enabled);
        sc.load.eps22 = l.value("eps22", sc.load.eps22);
        sc.load.eps22_rate = l.value("rate", sc.load.eps22_rate);
        sc.load.start_time = l.value("start_time", sc.load.start_time);
        const std::string interp = l.value("interpret", std::string("strain"));
        if (interp == "strain") sc.load.interpret = LoadSpec::Interpret::strain;
        else if (interp == "displacement") sc.load.interpret = LoadSpec::Interpret::displacement;
        else throw configuration_error("config: load.interpret must be 'strain' or 'displacement'");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        sc.tolerances.newton_abs = t.value("newton_abs", sc.tolerances.newton_abs);
        sc.tolerances.newton_max_iter = t.value("newton_max_iter", sc.tolerances.newton_max_iter);
        sc.tolerances.gmres_rel = t.value("gmres_rel", sc.tolerances.gmres_rel);
        sc.tolerances.gmres_abs = t.value("gmres_abs", sc.tolerances.gmres_abs);
        sc.tolerances.gmres_max_iter = t.value("gmres_max_iter", sc.tolerances.gmres_max_iter);
        sc.tolerances.gmres_restart = t.value("gmres_restart", sc.tolerances.gmres_restart);
    }
    sc.threads = j.value("threads", sc.threads);
    if (j.contains("materials")) {
        const auto& m = j["materials"];
        if (m.contains("E")) sc.materials.youngs_modulus = detail::parse_curve(m["E"], "E");
        if (m.contains("nu")) sc.materials.poisson_ratio = detail::parse_curve(m["nu"], "nu");
        if (m.contains("alpha_T")) sc.materials.expansion_coeff = detail::parse_curve(m["alpha_T"], "alpha_T");
        if (m.contains("lambda")) sc.materials.conductivity = detail::parse_curve(m["lambda"], "lambda");
        if (m.contains("c_rho")) sc.materials.heat_capacity = detail::parse_curve(m["c_rho"], "c_rho");
        sc.materials.density = m.value("rho", sc.materials.density);
    }
    if (j.contains("compare") && j["compare"].contains("combinations")) {
        for (const auto& c : j["compare"]["combinations"]) {
            CoarseCombo combo;
            combo.displacement = detail::parse_variant(c.at("displacement"));
            combo.temperature = detail::parse_variant(c.at("temperature"));
            combo.rotations = c.value("rotations", true);
            sc.compare_combinations.push_back(combo);
        }
    } else {
        sc.compare_combinations = default_compare_matrix();
    }
    sc.validate();
    return sc;
}

/// Parse a config file; parse errors are reported with a line number.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw configuration_error("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw configuration_error(path + ":" + std::to_string(line) + ": " + e.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw configuration_error(path + ": " + e.what());
    }
}

} // namespace lbws
