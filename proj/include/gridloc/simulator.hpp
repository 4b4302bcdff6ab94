#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gridloc/conv_odometry.hpp"
#include "gridloc/errors.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/heatmap.hpp"
#include "gridloc/likelihood_volume.hpp"
#include "gridloc/motion_model.hpp"
#include "gridloc/pose.hpp"
#include "gridloc/sensor_model.hpp"

namespace gridloc {

enum class TrajectoryShape { loop, figure_eight, corridor_with_repeats, waypoint_list };

struct TrajectorySpec {
    TrajectoryShape shape = TrajectoryShape::loop;
    double step_length = 0.5;  // metres travelled per step
    int n_steps = 100;
    Pose2D start;
    std::vector<std::array<double, 2>> waypoints;  // waypoint_list only

    void validate() const {
        if (n_steps < 1)
            throw config_error("trajectory: n_steps must be >= 1");
        if (!(step_length > 0.0))
            throw config_error("trajectory: step_length must be > 0");
        if (shape == TrajectoryShape::waypoint_list && waypoints.empty())
            throw config_error("trajectory: waypoint_list needs waypoints");
    }
};

namespace detail {

inline std::vector<Pose2D> circle_arc(const Pose2D& start, double step,
                                      int n_steps, bool left) {
    // radius such that n_steps steps close the circle
    const double radius = n_steps * step / kTwoPi;
    const double side = left ? 1.0 : -1.0;
    const double cx = start.x - side * radius * std::sin(start.theta());
    const double cy = start.y + side * radius * std::cos(start.theta());
    const double phi0 = start.theta() - side * kPi / 2.0;
    std::vector<Pose2D> poses;
    poses.reserve(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) {
        const double phi = phi0 + side * i * kTwoPi / n_steps;
        poses.emplace_back(cx + radius * std::cos(phi),
                           cy + radius * std::sin(phi),
                           phi + side * kPi / 2.0);
    }
    return poses;
}

inline std::vector<Pose2D> polyline_walk(const Pose2D& start, double step,
                                         int n_steps,
                                         const std::vector<std::array<double, 2>>& waypoints) {
    std::vector<std::array<double, 2>> points;
    points.push_back({start.x, start.y});
    points.insert(points.end(), waypoints.begin(), waypoints.end());

    std::vector<Pose2D> poses;
    poses.reserve(n_steps + 1);
    std::size_t seg = 0;
    double along = 0.0;  // distance already covered on the current segment
    auto segment_length = [&](std::size_t s) {
        return std::hypot(points[s + 1][0] - points[s][0],
                          points[s + 1][1] - points[s][1]);
    };
    auto segment_heading = [&](std::size_t s) {
        return std::atan2(points[s + 1][1] - points[s][1],
                          points[s + 1][0] - points[s][0]);
    };
    auto pose_at = [&](std::size_t s, double d) {
        const double len = segment_length(s);
        const double f = len > 0.0 ? d / len : 0.0;
        return Pose2D(points[s][0] + f * (points[s + 1][0] - points[s][0]),
                      points[s][1] + f * (points[s + 1][1] - points[s][1]),
                      segment_heading(s));
    };
    poses.push_back(pose_at(0, 0.0));
    for (int i = 1; i <= n_steps; ++i) {
        double remaining = step;
        while (remaining > 0.0) {
            const double len = segment_length(seg);
            if (along + remaining <= len) {
                along += remaining;
                remaining = 0.0;
            } else {
                remaining -= len - along;
                along = 0.0;
                ++seg;
                if (seg + 1 >= points.size())
                    throw config_error(
                        "trajectory: waypoint path is shorter than n_steps * "
                        "step_length");
            }
        }
        poses.push_back(pose_at(seg, along));
    }
    return poses;
}

}  // namespace detail

// n_steps + 1 poses, one step_length apart along the path, headings tangent.
inline std::vector<Pose2D> generate_trajectory(const TrajectorySpec& spec) {
    spec.validate();
    switch (spec.shape) {
        case TrajectoryShape::loop:
            return detail::circle_arc(spec.start, spec.step_length,
                                      spec.n_steps, true);
        case TrajectoryShape::figure_eight: {
            const int n1 = spec.n_steps / 2;
            const int n2 = spec.n_steps - n1;
            if (n1 < 1)
                throw config_error("trajectory: figure_eight needs n_steps >= 2");
            auto first = detail::circle_arc(spec.start, spec.step_length, n1, true);
            const auto second =
                detail::circle_arc(first.back(), spec.step_length, n2, false);
            first.insert(first.end(), second.begin() + 1, second.end());
            return first;
        }
        case TrajectoryShape::corridor_with_repeats: {
            // straight drive; the self-similarity of the corridor lives in
            // the observation model, not the path
            std::vector<Pose2D> poses;
            poses.reserve(spec.n_steps + 1);
            const double cx = std::cos(spec.start.theta());
            const double cy = std::sin(spec.start.theta());
            for (int i = 0; i <= spec.n_steps; ++i)
                poses.emplace_back(spec.start.x + i * spec.step_length * cx,
                                   spec.start.y + i * spec.step_length * cy,
                                   spec.start.theta());
            return poses;
        }
        case TrajectoryShape::waypoint_list:
            return detail::polyline_walk(spec.start, spec.step_length,
                                         spec.n_steps, spec.waypoints);
    }
    throw config_error("trajectory: unknown shape");
}

inline std::vector<Pose2D> generate_trajectory(const TrajectorySpec& spec,
                                               const GridSpec& grid) {
    auto poses = generate_trajectory(spec);
    for (std::size_t i = 0; i < poses.size(); ++i)
        if (!in_bounds(grid, poses[i]))
            throw out_of_bounds("trajectory: pose " + std::to_string(i) +
                                " (" + std::to_string(poses[i].x) + ", " +
                                std::to_string(poses[i].y) +
                                ") leaves the grid");
    return poses;
}

// One filter input: the noisy odometry reading covering (t-1, t] and the
// observation taken at time t. gt_pose is carried for evaluation only.
struct SimFrame {
    int t = 0;
    Pose2D gt_pose;
    RotTransRot odom_motion;
    Heatmap observation;
};

inline std::vector<SimFrame> simulate_frames(const TrajectorySpec& tspec,
                                             const GridSpec& grid,
                                             const NoiseParams& noise,
                                             const OracleParams& oracle,
                                             std::uint64_t odometry_seed,
                                             std::uint64_t oracle_seed) {
    const auto gt = generate_trajectory(tspec, grid);
    std::mt19937_64 odom_rng(odometry_seed);
    std::mt19937_64 oracle_rng(oracle_seed);
    std::vector<SimFrame> frames;
    frames.reserve(gt.size() - 1);
    for (std::size_t t = 1; t < gt.size(); ++t) {
        SimFrame frame;
        frame.t = static_cast<int>(t);
        frame.gt_pose = gt[t];
        frame.odom_motion =
            sample_noisy(decompose_motion(gt[t - 1], gt[t]), noise, odom_rng);
        frame.observation = oracle_observe(gt[t], grid, oracle, oracle_rng);
        frames.push_back(std::move(frame));
    }
    return frames;
}

// Integrate the odometry readings from the start pose; poses align with the
// frames.
inline std::vector<Pose2D> dead_reckoning(const Pose2D& start,
                                          const std::vector<SimFrame>& frames) {
    std::vector<Pose2D> poses;
    poses.reserve(frames.size());
    Pose2D current = start;
    for (const SimFrame& frame : frames) {
        current = compose_motion(current, frame.odom_motion);
        poses.push_back(current);
    }
    return poses;
}

struct FilterConfig {
    enum class Init { uniform, dirac };
    Init init = Init::dirac;
    Pose2D init_pose;        // dirac only
    NoiseParams noise;       // believed odometry noise, drives kernel widths
    bool use_motion = true;
    bool use_sensor = true;
    bool use_band_codec = true;
    int window_radius = 8;
    int n_threads = 1;
};

struct StepDiagnostics {
    int t = 0;
    double propagated_mass = 1.0;  // retained by propagate before renormalizing
    double entropy = 0.0;
    GridIndex argmax;
    double argmax_value = 0.0;
    bool fusion_reset = false;
    Covariance2x2 covariance;
    double circular_std = 0.0;
};

struct FilterStep {
    Pose2D estimate;
    StepDiagnostics diag;
};

// Markov localisation over the frame stream: propagate the belief through
// each odometry reading, fuse each observation, extract a pose. With
// use_sensor but not use_motion each frame is scored against a fresh uniform
// prior (per-frame snap to the observation); with use_motion but not
// use_sensor the belief just diffuses along the odometry.
inline std::vector<FilterStep> run_filter(
    const std::vector<SimFrame>& frames, const GridSpec& grid,
    const KernelSpec& kspec, const BandSpec& bands, const FilterConfig& cfg,
    const std::function<void(int, const LikelihoodVolume&)>& on_step = nullptr) {
    grid.validate();
    kspec.validate();
    bands.validate();
    cfg.noise.validate();
    if (!cfg.use_motion && !cfg.use_sensor)
        throw config_error("filter: nothing to do with both the motion and "
                           "sensor paths disabled");

    LikelihoodVolume belief = cfg.init == FilterConfig::Init::uniform
                                  ? init_uniform(grid)
                                  : init_dirac(grid, cfg.init_pose);
    MotionAccumulator acc(grid.theta_bins);
    std::vector<FilterStep> steps;
    steps.reserve(frames.size());
    for (const SimFrame& frame : frames) {
        StepDiagnostics diag;
        diag.t = frame.t;
        if (cfg.use_motion) {
            const auto rotated = rotate_and_scale(frame.odom_motion, grid);
            const auto shifts = accumulate(acc, rotated);
            const auto sigmas =
                sigmas_from_motion(frame.odom_motion, cfg.noise, grid, kspec);
            try {
                const auto kernel = build_kernel(shifts, sigmas, kspec);
                belief = propagate(belief, kernel, cfg.n_threads,
                                   &diag.propagated_mass);
            } catch (const kernel_overflow& e) {
                throw kernel_overflow(e.channel, e.axis, e.shift,
                                      e.half_extent, frame.t);
            }
        } else {
            belief = init_uniform(grid);
        }
        if (cfg.use_sensor) {
            Heatmap h = frame.observation;
            if (cfg.use_band_codec) {
                peak_normalize(h);
                h = decode_bands(encode_bands(h, bands), bands);
            }
            belief = bayes_update(belief, h, &diag.fusion_reset);
        }
        diag.entropy = entropy(belief);
        diag.argmax = argmax_index(belief);
        diag.argmax_value =
            belief.at(diag.argmax.t_idx, diag.argmax.x_idx, diag.argmax.y_idx);
        const PoseEstimate est = extract_pose(belief, cfg.window_radius);
        diag.covariance = est.covariance;
        diag.circular_std = est.circular_std;
        if (on_step) on_step(frame.t, belief);
        steps.push_back({est.pose, diag});
    }
    return steps;
}

}  // namespace gridloc
