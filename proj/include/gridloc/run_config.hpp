#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gridloc/conv_odometry.hpp"
#include "gridloc/errors.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/motion_model.hpp"
#include "gridloc/sensor_model.hpp"
#include "gridloc/simulator.hpp"

namespace gridloc {

struct FilterSettings {
    std::string init = "dirac";  // "dirac" | "uniform"
    bool use_motion = true;
    bool use_sensor = true;
    bool use_band_codec = true;
    int window_radius = 8;
    int n_threads = 1;
    int dump_volume_every = 0;  // 0 disables volume dumps
};

struct BenchSettings {
    int reps = 50;
    int n_threads = 1;
};

struct RunConfig {
    std::string mode;  // optional; must match the subcommand when set
    GridSpec grid;
    KernelSpec kernel;
    BandSpec bands;
    NoiseParams noise;
    OracleParams oracle;
    TrajectorySpec trajectory;
    FilterSettings filter;
    BenchSettings bench;
    RotTransRot kernel_dump_motion{0.0, 1.0, 0.0};
    std::uint64_t odometry_seed = 1;
    std::uint64_t oracle_seed = 2;
    std::string output_dir = "out";

    void validate() const {
        grid.validate();
        kernel.validate();
        if (kernel.k_theta > grid.theta_bins || kernel.k_x > grid.x_bins ||
            kernel.k_y > grid.y_bins)
            throw config_error("config: kernel extents must not exceed the "
                               "grid extents");
        bands.validate();
        noise.validate();
        oracle.validate();
        trajectory.validate();
        if (filter.init != "dirac" && filter.init != "uniform")
            throw config_error("config: filter.init must be 'dirac' or "
                               "'uniform'");
        if (filter.window_radius < 0)
            throw config_error("config: filter.window_radius must be >= 0");
        if (filter.n_threads < 1)
            throw config_error("config: filter.threads must be >= 1");
        if (filter.dump_volume_every < 0)
            throw config_error("config: filter.dump_volume_every must be >= 0");
        if (bench.reps < 2)
            throw config_error("config: bench.reps must be >= 2");
        if (bench.n_threads < 1)
            throw config_error("config: bench.threads must be >= 1");
        if (!mode.empty() && mode != "simulate" && mode != "localize" &&
            mode != "eval" && mode != "kernel-dump" && mode != "bench")
            throw config_error("config: unknown mode '" + mode + "'");
    }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& j, const std::string& section,
                                std::initializer_list<std::string_view> allowed) {
    if (!j.is_object())
        throw config_error("config: '" +
                           (section.empty() ? std::string("<top>") : section) +
                           "' must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (std::string_view key : allowed)
            if (key == it.key()) {
                known = true;
                break;
            }
        if (!known)
            throw config_error("config: unknown key '" +
                               (section.empty() ? it.key()
                                                : section + "." + it.key()) +
                               "'");
    }
}

inline const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline double as_number(const json& j, const std::string& where) {
    if (!j.is_number())
        throw config_error("config: '" + where + "' must be a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer())
        throw config_error("config: '" + where + "' must be an integer");
    return j.get<int>();
}

inline bool as_bool(const json& j, const std::string& where) {
    if (!j.is_boolean())
        throw config_error("config: '" + where + "' must be a boolean");
    return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string())
        throw config_error("config: '" + where + "' must be a string");
    return j.get<std::string>();
}

inline Pose2D as_pose(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw config_error("config: '" + where + "' must be [x, y, theta]");
    return Pose2D(as_number(j[0], where), as_number(j[1], where),
                  as_number(j[2], where));
}

inline void parse_grid(const json& j, GridSpec& grid) {
    reject_unknown_keys(j, "grid",
                        {"theta_bins", "x_bins", "y_bins", "res_x", "res_y",
                         "origin_x", "origin_y"});
    if (const json* v = find(j, "theta_bins"))
        grid.theta_bins = as_int(*v, "grid.theta_bins");
    if (const json* v = find(j, "x_bins")) grid.x_bins = as_int(*v, "grid.x_bins");
    if (const json* v = find(j, "y_bins")) grid.y_bins = as_int(*v, "grid.y_bins");
    if (const json* v = find(j, "res_x")) grid.res_x = as_number(*v, "grid.res_x");
    if (const json* v = find(j, "res_y")) grid.res_y = as_number(*v, "grid.res_y");
    if (const json* v = find(j, "origin_x"))
        grid.origin_x = as_number(*v, "grid.origin_x");
    if (const json* v = find(j, "origin_y"))
        grid.origin_y = as_number(*v, "grid.origin_y");
    if (grid.theta_bins > 0) grid.res_theta = kTwoPi / grid.theta_bins;
}

inline void parse_kernel(const json& j, KernelSpec& kernel) {
    reject_unknown_keys(j, "kernel",
                        {"k_theta", "k_x", "k_y", "sigma_floor",
                         "sigma_scale_theta", "sigma_scale_x", "sigma_scale_y"});
    if (const json* v = find(j, "k_theta")) kernel.k_theta = as_int(*v, "kernel.k_theta");
    if (const json* v = find(j, "k_x")) kernel.k_x = as_int(*v, "kernel.k_x");
    if (const json* v = find(j, "k_y")) kernel.k_y = as_int(*v, "kernel.k_y");
    if (const json* v = find(j, "sigma_floor"))
        kernel.sigma_floor = as_number(*v, "kernel.sigma_floor");
    if (const json* v = find(j, "sigma_scale_theta"))
        kernel.sigma_scale_theta = as_number(*v, "kernel.sigma_scale_theta");
    if (const json* v = find(j, "sigma_scale_x"))
        kernel.sigma_scale_x = as_number(*v, "kernel.sigma_scale_x");
    if (const json* v = find(j, "sigma_scale_y"))
        kernel.sigma_scale_y = as_number(*v, "kernel.sigma_scale_y");
}

inline void parse_bands(const json& j, BandSpec& bands) {
    reject_unknown_keys(j, "bands", {"n_bands", "top_n"});
    if (const json* v = find(j, "n_bands")) bands.n_bands = as_int(*v, "bands.n_bands");
    if (const json* v = find(j, "top_n")) bands.top_n = as_int(*v, "bands.top_n");
}

inline void parse_noise(const json& j, NoiseParams& noise) {
    reject_unknown_keys(j, "noise", {"a1", "a2", "a3", "a4"});
    if (const json* v = find(j, "a1")) noise.a1 = as_number(*v, "noise.a1");
    if (const json* v = find(j, "a2")) noise.a2 = as_number(*v, "noise.a2");
    if (const json* v = find(j, "a3")) noise.a3 = as_number(*v, "noise.a3");
    if (const json* v = find(j, "a4")) noise.a4 = as_number(*v, "noise.a4");
}

inline void parse_oracle(const json& j, OracleParams& oracle) {
    reject_unknown_keys(j, "oracle",
                        {"sigma_obs", "floor", "dropout_prob", "distractors"});
    if (const json* v = find(j, "sigma_obs"))
        oracle.sigma_obs = as_number(*v, "oracle.sigma_obs");
    if (const json* v = find(j, "floor"))
        oracle.floor = as_number(*v, "oracle.floor");
    if (const json* v = find(j, "dropout_prob"))
        oracle.dropout_prob = as_number(*v, "oracle.dropout_prob");
    if (const json* v = find(j, "distractors")) {
        if (!v->is_array())
            throw config_error("config: 'oracle.distractors' must be an array");
        for (const json& dj : *v) {
            reject_unknown_keys(dj, "oracle.distractors",
                                {"dx", "dy", "x", "y", "weight"});
            const bool rel = find(dj, "dx") || find(dj, "dy");
            const bool abs = find(dj, "x") || find(dj, "y");
            if (rel == abs)
                throw config_error("config: a distractor needs either dx/dy "
                                   "(relative) or x/y (absolute)");
            Distractor d;
            d.relative = rel;
            if (rel) {
                if (const json* w = find(dj, "dx"))
                    d.x = as_number(*w, "oracle.distractors.dx");
                if (const json* w = find(dj, "dy"))
                    d.y = as_number(*w, "oracle.distractors.dy");
            } else {
                if (const json* w = find(dj, "x"))
                    d.x = as_number(*w, "oracle.distractors.x");
                if (const json* w = find(dj, "y"))
                    d.y = as_number(*w, "oracle.distractors.y");
            }
            if (const json* w = find(dj, "weight"))
                d.weight = as_number(*w, "oracle.distractors.weight");
            oracle.distractors.push_back(d);
        }
    }
}

inline void parse_trajectory(const json& j, TrajectorySpec& traj) {
    reject_unknown_keys(j, "trajectory",
                        {"shape", "step_length", "n_steps", "start",
                         "waypoints"});
    if (const json* v = find(j, "shape")) {
        const std::string s = as_string(*v, "trajectory.shape");
        if (s == "loop") traj.shape = TrajectoryShape::loop;
        else if (s == "figure-eight") traj.shape = TrajectoryShape::figure_eight;
        else if (s == "corridor-with-repeats")
            traj.shape = TrajectoryShape::corridor_with_repeats;
        else if (s == "waypoint-list") traj.shape = TrajectoryShape::waypoint_list;
        else
            throw config_error("config: unknown trajectory.shape '" + s + "'");
    }
    if (const json* v = find(j, "step_length"))
        traj.step_length = as_number(*v, "trajectory.step_length");
    if (const json* v = find(j, "n_steps"))
        traj.n_steps = as_int(*v, "trajectory.n_steps");
    if (const json* v = find(j, "start"))
        traj.start = as_pose(*v, "trajectory.start");
    if (const json* v = find(j, "waypoints")) {
        if (!v->is_array())
            throw config_error("config: 'trajectory.waypoints' must be an "
                               "array of [x, y]");
        for (const json& wj : *v) {
            if (!wj.is_array() || wj.size() != 2)
                throw config_error("config: each waypoint must be [x, y]");
            traj.waypoints.push_back({as_number(wj[0], "trajectory.waypoints"),
                                      as_number(wj[1], "trajectory.waypoints")});
        }
    }
}

inline void parse_filter(const json& j, FilterSettings& filter) {
    reject_unknown_keys(j, "filter",
                        {"init", "use_motion", "use_sensor", "use_band_codec",
                         "window_radius", "threads", "dump_volume_every"});
    if (const json* v = find(j, "init")) filter.init = as_string(*v, "filter.init");
    if (const json* v = find(j, "use_motion"))
        filter.use_motion = as_bool(*v, "filter.use_motion");
    if (const json* v = find(j, "use_sensor"))
        filter.use_sensor = as_bool(*v, "filter.use_sensor");
    if (const json* v = find(j, "use_band_codec"))
        filter.use_band_codec = as_bool(*v, "filter.use_band_codec");
    if (const json* v = find(j, "window_radius"))
        filter.window_radius = as_int(*v, "filter.window_radius");
    if (const json* v = find(j, "threads"))
        filter.n_threads = as_int(*v, "filter.threads");
    if (const json* v = find(j, "dump_volume_every"))
        filter.dump_volume_every = as_int(*v, "filter.dump_volume_every");
}

inline void parse_bench(const json& j, BenchSettings& bench) {
    reject_unknown_keys(j, "bench", {"reps", "threads"});
    if (const json* v = find(j, "reps")) bench.reps = as_int(*v, "bench.reps");
    if (const json* v = find(j, "threads"))
        bench.n_threads = as_int(*v, "bench.threads");
}

inline void parse_kernel_dump(const json& j, RotTransRot& motion) {
    reject_unknown_keys(j, "kernel_dump", {"dtheta1", "dx", "dtheta2"});
    double r1 = motion.d_theta1, x = motion.d_x, r2 = motion.d_theta2;
    if (const json* v = find(j, "dtheta1")) r1 = as_number(*v, "kernel_dump.dtheta1");
    if (const json* v = find(j, "dx")) x = as_number(*v, "kernel_dump.dx");
    if (const json* v = find(j, "dtheta2")) r2 = as_number(*v, "kernel_dump.dtheta2");
    motion = RotTransRot(r1, x, r2);
}

}  // namespace detail

// Operating point used when a section is omitted: a 72 x 256 x 256 grid of
// 0.5 m cells centred on the origin with a 15 x 21 x 21 kernel.
inline RunConfig default_run_config() {
    RunConfig cfg;
    cfg.grid.theta_bins = 72;
    cfg.grid.x_bins = 256;
    cfg.grid.y_bins = 256;
    cfg.grid.res_x = 0.5;
    cfg.grid.res_y = 0.5;
    cfg.grid.res_theta = kTwoPi / 72;
    cfg.grid.origin_x = -63.75;
    cfg.grid.origin_y = -63.75;
    return cfg;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    if (!j.is_object())
        throw config_error("config: top level must be a JSON object");
    detail::reject_unknown_keys(
        j, "",
        {"mode", "grid", "kernel", "bands", "noise", "oracle", "trajectory",
         "filter", "bench", "kernel_dump", "odometry_seed", "oracle_seed",
         "output_dir"});
    RunConfig cfg = default_run_config();
    if (const auto* v = detail::find(j, "mode"))
        cfg.mode = detail::as_string(*v, "mode");
    if (const auto* v = detail::find(j, "grid")) detail::parse_grid(*v, cfg.grid);
    if (const auto* v = detail::find(j, "kernel"))
        detail::parse_kernel(*v, cfg.kernel);
    if (const auto* v = detail::find(j, "bands")) detail::parse_bands(*v, cfg.bands);
    if (const auto* v = detail::find(j, "noise")) detail::parse_noise(*v, cfg.noise);
    if (const auto* v = detail::find(j, "oracle"))
        detail::parse_oracle(*v, cfg.oracle);
    if (const auto* v = detail::find(j, "trajectory"))
        detail::parse_trajectory(*v, cfg.trajectory);
    if (const auto* v = detail::find(j, "filter"))
        detail::parse_filter(*v, cfg.filter);
    if (const auto* v = detail::find(j, "bench")) detail::parse_bench(*v, cfg.bench);
    if (const auto* v = detail::find(j, "kernel_dump"))
        detail::parse_kernel_dump(*v, cfg.kernel_dump_motion);
    if (const auto* v = detail::find(j, "odometry_seed")) {
        if (!v->is_number_unsigned())
            throw config_error("config: 'odometry_seed' must be a nonnegative "
                               "integer");
        cfg.odometry_seed = v->get<std::uint64_t>();
    }
    if (const auto* v = detail::find(j, "oracle_seed")) {
        if (!v->is_number_unsigned())
            throw config_error("config: 'oracle_seed' must be a nonnegative "
                               "integer");
        cfg.oracle_seed = v->get<std::uint64_t>();
    }
    if (const auto* v = detail::find(j, "output_dir"))
        cfg.output_dir = detail::as_string(*v, "output_dir");
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error(path + ": cannot open config");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(path + ": invalid JSON (" + std::string(e.what()) +
                           ")");
    }
    try {
        return parse_run_config(j);
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

}  // namespace gridloc
