#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coopnav/trial.hpp"

namespace coopnav {

namespace {

using nlohmann::json;

double get_num(const json& j, const char* key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_number()) throw ParseError(std::string("config field '") + key + "' must be a number");
    return it->get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_number_integer()) throw ParseError(std::string("config field '") + key + "' must be an integer");
    return it->get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_boolean()) throw ParseError(std::string("config field '") + key + "' must be a boolean");
    return it->get<bool>();
}

SyntheticMapSpec parse_synthetic_spec(const json& j) {
    SyntheticMapSpec spec;
    spec.seed = static_cast<std::uint64_t>(get_num(j, "seed", 0.0));
    spec.cell_size = get_num(j, "cell_size_m", 100.0);
    spec.baseline = get_num(j, "baseline_nt", 0.0);
    spec.origin_east = get_num(j, "origin_east_m", 0.0);
    spec.origin_north = get_num(j, "origin_north_m", 0.0);
    spec.extent_east = get_num(j, "extent_east_m", 0.0);
    spec.extent_north = get_num(j, "extent_north_m", 0.0);
    // bump_count < 0 means "derive from density and extent" (resolved by
    // build_map once the extent is known)
    spec.bump_count = get_int(j, "bump_count", -1);
    spec.bump_amplitude_min = get_num(j, "bump_amplitude_min_nt", -250.0);
    spec.bump_amplitude_max = get_num(j, "bump_amplitude_max_nt", 250.0);
    spec.bump_sigma_min = get_num(j, "bump_sigma_min_m", 250.0);
    spec.bump_sigma_max = get_num(j, "bump_sigma_max_m", 1500.0);
    return spec;
}

TrialConfig parse_config_json(const json& root) {
    TrialConfig cfg;
    cfg.group_size = get_int(root, "group_size", cfg.group_size);
    cfg.duration = get_num(root, "duration_s", cfg.duration);
    cfg.filter_period = get_num(root, "filter_period_s", cfg.filter_period);
    cfg.odometry_substeps = get_int(root, "odometry_substeps", cfg.odometry_substeps);
    cfg.master_seed = static_cast<std::uint64_t>(get_num(root, "master_seed", 0.0));
    cfg.default_trials = get_int(root, "trials", cfg.default_trials);
    cfg.monitor_covariance = get_bool(root, "monitor_covariance", false);

    if (const auto it = root.find("noise"); it != root.end()) {
        const json& j = *it;
        cfg.noise.sigma_r = get_num(j, "sigma_r_m", cfg.noise.sigma_r);
        cfg.noise.sigma_m = get_num(j, "sigma_m_nt", cfg.noise.sigma_m);
        cfg.noise.sigma_v = get_num(j, "sigma_v_mps", cfg.noise.sigma_v);
        cfg.noise.sigma_g = deg_to_rad(get_num(j, "sigma_g_degps", 0.005));
        cfg.bias_v_fraction = get_num(j, "bias_v_fraction", cfg.bias_v_fraction);
        cfg.bias_g_fraction = get_num(j, "bias_g_fraction", cfg.bias_g_fraction);
    } else {
        cfg.noise.sigma_g = deg_to_rad(0.005);
    }
    cfg.resolve_bias_stds();

    if (const auto it = root.find("init"); it != root.end()) {
        const json& j = *it;
        cfg.init.true_position_jitter = get_num(j, "true_position_jitter_m", 1.0);
        cfg.init.estimate_position_std = get_num(j, "estimate_position_std_m", 1.0);
        cfg.init.estimate_heading_std = deg_to_rad(get_num(j, "estimate_heading_std_deg", 1.0));
        cfg.init.gamma_init_std = deg_to_rad(get_num(j, "gamma_init_std_deg", 1.0));
        cfg.init.group_rotation_error = deg_to_rad(get_num(j, "group_rotation_error_deg", 0.0));
    } else {
        cfg.init.estimate_heading_std = deg_to_rad(1.0);
        cfg.init.gamma_init_std = deg_to_rad(1.0);
    }

    if (const auto it = root.find("reference"); it != root.end()) {
        const json& j = *it;
        cfg.reference.vel_amplitude = get_num(j, "velocity_amplitude_mps", 10.0);
        cfg.reference.vel_baseline = get_num(j, "velocity_baseline_mps", 50.0);
        cfg.reference.vel_angular_frequency =
            get_num(j, "velocity_angular_frequency_radps", 0.05);
        cfg.reference.track_spacing = get_num(j, "track_spacing_m", 1000.0);
    }

    if (const auto it = root.find("controller"); it != root.end()) {
        const json& j = *it;
        cfg.controller.heading_gain = get_num(j, "heading_gain", 1.0);
        cfg.controller.cross_track_gain = get_num(j, "cross_track_gain_per_m", 0.01);
        cfg.controller.max_approach_angle = get_num(j, "max_approach_angle_rad", 0.35);
        cfg.controller.max_yaw_rate = get_num(j, "max_yaw_rate_radps", 0.2);
    }

    if (const auto it = root.find("ekf"); it != root.end())
        cfg.ekf.process_noise_inflation = get_num(*it, "process_noise_inflation", 2.0);

    if (const auto it = root.find("pf"); it != root.end()) {
        const json& j = *it;
        cfg.pf.particle_count = get_int(j, "particle_count", 10000);
        cfg.pf.position_noise_std = get_num(j, "position_noise_m", cfg.pf.position_noise_std);
        cfg.pf.heading_noise_std = get_num(j, "heading_noise_rad", cfg.pf.heading_noise_std);
        cfg.pf.gamma_noise_std = get_num(j, "gamma_noise_rad", cfg.pf.gamma_noise_std);
        cfg.pf.resample_threshold = get_num(j, "resample_threshold", cfg.pf.resample_threshold);
        if (const auto s = j.find("likelihood_sigma_nt"); s != j.end() && !s->is_null())
            cfg.likelihood_sigma_override = s->get<double>();
    }

    const auto map_it = root.find("map");
    if (map_it == root.end())
        throw ParseError("config must contain a 'map' section");
    const json& mj = *map_it;
    if (const auto g = mj.find("grid_file"); g != mj.end() && !g->is_null())
        cfg.map.grid_file = g->get<std::string>();
    if (const auto s = mj.find("synthetic"); s != mj.end() && !s->is_null()) {
        cfg.map.synthetic = parse_synthetic_spec(*s);
        cfg.map.bump_density_per_km2 = get_num(*s, "bump_density_per_km2", 0.25);
        cfg.map.margin = get_num(*s, "margin_m", 10000.0);
    }

    if (const auto it = root.find("low_resolution"); it != root.end()) {
        cfg.low_resolution.enabled = get_bool(*it, "enabled", false);
        cfg.low_resolution.smoothing_sigma = get_num(*it, "smoothing_sigma_m", 400.0);
    }

    if (const auto it = root.find("trace"); it != root.end()) {
        cfg.trace.enabled = get_bool(*it, "enabled", false);
        if (const auto d = it->find("directory"); d != it->end() && !d->is_null())
            cfg.trace.directory = d->get<std::string>();
    }

    cfg.validate();
    return cfg;
}

std::vector<SweepCase> parse_sweep(const json& root) {
    std::vector<SweepCase> cases;
    const auto it = root.find("sweep");
    if (it == root.end()) return cases;
    for (const auto& j : *it) {
        SweepCase c;
        c.field = j.at("field").get<std::string>();
        c.value = j.at("value").get<double>();
        if (const auto n = j.find("name"); n != j.end()) {
            c.name = n->get<std::string>();
        } else {
            std::ostringstream name;
            name << c.field << "_" << c.value;
            c.name = name.str();
        }
        if (c.field != "sigma_r_m" && c.field != "sigma_m_nt" && c.field != "sigma_v_mps" &&
            c.field != "sigma_g_degps")
            throw ParseError("sweep field must be one of sigma_r_m, sigma_m_nt, sigma_v_mps, "
                             "sigma_g_degps; got '" + c.field + "'");
        cases.push_back(std::move(c));
    }
    return cases;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config parse error in ") + path + ": " + e.what());
    }
}

} // namespace

TrialConfig load_trial_config(const std::string& path) {
    return parse_config_json(load_json_file(path));
}

TrialConfig parse_trial_config(const std::string& json_text) {
    try {
        return parse_config_json(json::parse(json_text));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
}

std::vector<SweepCase> load_sweep_cases(const std::string& path) {
    return parse_sweep(load_json_file(path));
}

TrialConfig apply_sweep_case(TrialConfig cfg, const SweepCase& c) {
    if (c.field == "sigma_r_m") cfg.noise.sigma_r = c.value;
    else if (c.field == "sigma_m_nt") cfg.noise.sigma_m = c.value;
    else if (c.field == "sigma_v_mps") cfg.noise.sigma_v = c.value;
    else if (c.field == "sigma_g_degps") cfg.noise.sigma_g = deg_to_rad(c.value);
    else throw InvalidSpecError("unknown sweep field: " + c.field);
    cfg.resolve_bias_stds();
    cfg.validate();
    return cfg;
}

} // namespace coopnav
