// Flat key=value configuration shared by the CLI subcommands. Keys mirror
// the platform parameter names; a handful of harness knobs extend them.
#pragma once

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "tandem/controller.hpp"
#include "tandem/errors.hpp"
#include "tandem/pose2.hpp"
#include "tandem/route.hpp"
#include "tandem/sim.hpp"

namespace tandem {

struct Config {
    // camera and image pipeline
    int image_width = 115;
    int image_height = 44;
    int patch_size = 8;
    int ncc_search_px = 75;
    double fov_deg = 75.0;

    // keyframe spacing
    double tau_d = 0.3;
    double tau_alpha = 15.0;  // degrees

    // correction gains
    double k_theta = 0.01;
    double k_p = 0.01;
    int k_window = 3;
    double rho_bar = 0.1;
    bool eq8_literal = false;

    // drive limits and rates
    double v_max = 0.4;
    double omega_max = 1.5;
    double control_rate_hz = 50.0;
    double correction_rate_hz = 10.0;

    // trial setup
    double crash_lateral_m = 1.0;
    double stall_timeout_s = 30.0;
    double time_limit_s = 600.0;
    double init_threshold = 0.3;
    double odom_scale = 1.0;
    double odom_linear_noise = 0.0;
    double odom_angular_noise = 0.0;
    double lighting_gain = 1.0;
    double lighting_bias = 0.0;
    double lighting_shadow = 1.0;
    double start_lateral_m = 0.0;
    double start_along_m = 0.0;
    double start_heading_deg = 0.0;

    RecordingParams recording_params() const {
        RecordingParams p;
        p.tau_d = tau_d;
        p.tau_alpha = deg_to_rad(tau_alpha);
        p.image_width = image_width;
        p.image_height = image_height;
        p.patch_size = patch_size;
        p.fov = deg_to_rad(fov_deg);
        p.search_range = ncc_search_px;
        return p;
    }

    CameraConfig camera() const {
        CameraConfig c;
        c.fov = deg_to_rad(fov_deg);
        c.image_width = image_width;
        c.image_height = image_height;
        return c;
    }

    ControllerGains controller_gains() const {
        ControllerGains g;
        g.v_max = v_max;
        g.omega_max = omega_max;
        return g;
    }

    CorrectionGains correction_gains() const {
        CorrectionGains c;
        c.k_theta = k_theta;
        c.k_p = k_p;
        c.k_window = k_window;
        c.rho_bar = rho_bar;
        c.correction_period = 1.0 / correction_rate_hz;
        c.eq8_literal = eq8_literal;
        return c;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

template <typename T>
inline T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out;
    in >> out;
    if (in.fail() || !(in >> std::ws).eof())
        throw ConfigError("config: bad value '" + value + "' for " + key);
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad value '" + value + "' for " + key);
}

}  // namespace detail

inline void apply_config_entry(Config& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_number;
    static const std::map<std::string, std::function<void(Config&, const std::string&)>>
        setters = {
            {"image_width", [](Config& c, const std::string& v) { c.image_width = parse_number<int>("image_width", v); }},
            {"image_height", [](Config& c, const std::string& v) { c.image_height = parse_number<int>("image_height", v); }},
            {"patch_size", [](Config& c, const std::string& v) { c.patch_size = parse_number<int>("patch_size", v); }},
            {"ncc_search_px", [](Config& c, const std::string& v) { c.ncc_search_px = parse_number<int>("ncc_search_px", v); }},
            {"fov_deg", [](Config& c, const std::string& v) { c.fov_deg = parse_number<double>("fov_deg", v); }},
            {"tau_d", [](Config& c, const std::string& v) { c.tau_d = parse_number<double>("tau_d", v); }},
            {"tau_alpha", [](Config& c, const std::string& v) { c.tau_alpha = parse_number<double>("tau_alpha", v); }},
            {"k_theta", [](Config& c, const std::string& v) { c.k_theta = parse_number<double>("k_theta", v); }},
            {"k_p", [](Config& c, const std::string& v) { c.k_p = parse_number<double>("k_p", v); }},
            {"k_window", [](Config& c, const std::string& v) { c.k_window = parse_number<int>("k_window", v); }},
            {"rho_bar", [](Config& c, const std::string& v) { c.rho_bar = parse_number<double>("rho_bar", v); }},
            {"eq8_literal", [](Config& c, const std::string& v) { c.eq8_literal = parse_bool("eq8_literal", v); }},
            {"v_max", [](Config& c, const std::string& v) { c.v_max = parse_number<double>("v_max", v); }},
            {"omega_max", [](Config& c, const std::string& v) { c.omega_max = parse_number<double>("omega_max", v); }},
            {"control_rate_hz", [](Config& c, const std::string& v) { c.control_rate_hz = parse_number<double>("control_rate_hz", v); }},
            {"correction_rate_hz", [](Config& c, const std::string& v) { c.correction_rate_hz = parse_number<double>("correction_rate_hz", v); }},
            {"crash_lateral_m", [](Config& c, const std::string& v) { c.crash_lateral_m = parse_number<double>("crash_lateral_m", v); }},
            {"stall_timeout_s", [](Config& c, const std::string& v) { c.stall_timeout_s = parse_number<double>("stall_timeout_s", v); }},
            {"time_limit_s", [](Config& c, const std::string& v) { c.time_limit_s = parse_number<double>("time_limit_s", v); }},
            {"init_threshold", [](Config& c, const std::string& v) { c.init_threshold = parse_number<double>("init_threshold", v); }},
            {"odom_scale", [](Config& c, const std::string& v) { c.odom_scale = parse_number<double>("odom_scale", v); }},
            {"odom_linear_noise", [](Config& c, const std::string& v) { c.odom_linear_noise = parse_number<double>("odom_linear_noise", v); }},
            {"odom_angular_noise", [](Config& c, const std::string& v) { c.odom_angular_noise = parse_number<double>("odom_angular_noise", v); }},
            {"lighting_gain", [](Config& c, const std::string& v) { c.lighting_gain = parse_number<double>("lighting_gain", v); }},
            {"lighting_bias", [](Config& c, const std::string& v) { c.lighting_bias = parse_number<double>("lighting_bias", v); }},
            {"lighting_shadow", [](Config& c, const std::string& v) { c.lighting_shadow = parse_number<double>("lighting_shadow", v); }},
            {"start_lateral_m", [](Config& c, const std::string& v) { c.start_lateral_m = parse_number<double>("start_lateral_m", v); }},
            {"start_along_m", [](Config& c, const std::string& v) { c.start_along_m = parse_number<double>("start_along_m", v); }},
            {"start_heading_deg", [](Config& c, const std::string& v) { c.start_heading_deg = parse_number<double>("start_heading_deg", v); }},
        };
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second(cfg, value);
}

// key=value per line; blank lines and lines starting with # are ignored.
inline Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: missing '=' at " + path.string() + ":" +
                              std::to_string(lineno));
        apply_config_entry(cfg, detail::trim(stripped.substr(0, eq)),
                           detail::trim(stripped.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace tandem
