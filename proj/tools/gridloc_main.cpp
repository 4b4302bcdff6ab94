#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridloc/gridloc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frame_name(int t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", t);
    return buf;
}

void check_mode(const gridloc::RunConfig& cfg, const std::string& command) {
    if (!cfg.mode.empty() && cfg.mode != command)
        throw gridloc::config_error("config mode '" + cfg.mode +
                                    "' does not match subcommand '" + command +
                                    "'");
}

json grid_to_json(const gridloc::GridSpec& g) {
    return json{{"theta_bins", g.theta_bins}, {"x_bins", g.x_bins},
                {"y_bins", g.y_bins},         {"res_x", g.res_x},
                {"res_y", g.res_y},           {"res_theta", g.res_theta},
                {"origin_x", g.origin_x},     {"origin_y", g.origin_y}};
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw gridloc::data_error(path + ": cannot open for writing");
    os << content;
    if (!os) throw gridloc::data_error(path + ": write failed");
}

// ---- simulate ----

int cmd_simulate(const gridloc::RunConfig& cfg) {
    const auto gt = gridloc::generate_trajectory(cfg.trajectory, cfg.grid);
    const auto frames = gridloc::simulate_frames(
        cfg.trajectory, cfg.grid, cfg.noise, cfg.oracle, cfg.odometry_seed,
        cfg.oracle_seed);

    fs::create_directories(cfg.output_dir + "/obs");
    std::vector<gridloc::TimedPose> traj_rows;
    traj_rows.push_back({0, gt[0]});
    std::vector<gridloc::TimedMotion> odom_rows;
    for (const auto& frame : frames) {
        traj_rows.push_back({frame.t, frame.gt_pose});
        odom_rows.push_back({frame.t, frame.odom_motion});
        gridloc::save_heatmap(
            cfg.output_dir + "/obs/" + frame_name(frame.t) + ".hmap",
            frame.observation);
    }
    gridloc::write_trajectory_csv(cfg.output_dir + "/traj_gt.csv", traj_rows);
    gridloc::write_odometry_csv(cfg.output_dir + "/odom.csv", odom_rows);

    json manifest{{"format", "gridloc-frames"},
                  {"version", 1},
                  {"n_frames", static_cast<int>(frames.size())},
                  {"grid", grid_to_json(cfg.grid)},
                  {"start", {gt[0].x, gt[0].y, gt[0].theta()}},
                  {"odometry_seed", cfg.odometry_seed},
                  {"oracle_seed", cfg.oracle_seed}};
    write_text(cfg.output_dir + "/manifest.json", manifest.dump(2) + "\n");

    std::cout << "wrote " << frames.size() << " frames to " << cfg.output_dir
              << "\n";
    return 0;
}

// ---- localize ----

struct FrameSet {
    gridloc::Pose2D start;
    std::vector<gridloc::SimFrame> frames;
};

FrameSet load_frames(const std::string& dir, const gridloc::GridSpec& grid) {
    const auto traj = gridloc::read_trajectory_csv(dir + "/traj_gt.csv");
    if (traj.empty() || traj.front().t != 0)
        throw gridloc::data_error(dir + "/traj_gt.csv: must start at t=0");
    const auto odom = gridloc::read_odometry_csv(dir + "/odom.csv");
    std::map<int, gridloc::Pose2D> gt_by_t;
    for (const auto& row : traj) gt_by_t[row.t] = row.pose;

    FrameSet set;
    set.start = traj.front().pose;
    for (const auto& row : odom) {
        gridloc::SimFrame frame;
        frame.t = row.t;
        frame.odom_motion = row.motion;
        const auto it = gt_by_t.find(row.t);
        if (it == gt_by_t.end())
            throw gridloc::data_error(dir + "/traj_gt.csv: no ground-truth row "
                                      "for frame " + std::to_string(row.t));
        frame.gt_pose = it->second;
        const std::string obs_path =
            dir + "/obs/" + frame_name(row.t) + ".hmap";
        if (!fs::exists(obs_path))
            throw gridloc::data_error(obs_path + ": observation for frame " +
                                      std::to_string(row.t) + " is missing");
        frame.observation = gridloc::load_heatmap(obs_path);
        if (frame.observation.x_bins != grid.x_bins ||
            frame.observation.y_bins != grid.y_bins)
            throw gridloc::data_error(obs_path + ": heatmap extents do not "
                                      "match the grid");
        set.frames.push_back(std::move(frame));
    }
    return set;
}

int cmd_localize(const gridloc::RunConfig& cfg, const std::string& frames_dir) {
    FrameSet set;
    if (frames_dir.empty()) {
        const auto gt = gridloc::generate_trajectory(cfg.trajectory, cfg.grid);
        set.start = gt[0];
        set.frames = gridloc::simulate_frames(cfg.trajectory, cfg.grid,
                                              cfg.noise, cfg.oracle,
                                              cfg.odometry_seed, cfg.oracle_seed);
    } else {
        set = load_frames(frames_dir, cfg.grid);
    }

    gridloc::FilterConfig fcfg;
    fcfg.init = cfg.filter.init == "uniform"
                    ? gridloc::FilterConfig::Init::uniform
                    : gridloc::FilterConfig::Init::dirac;
    fcfg.init_pose = set.start;
    fcfg.noise = cfg.noise;
    fcfg.use_motion = cfg.filter.use_motion;
    fcfg.use_sensor = cfg.filter.use_sensor;
    fcfg.use_band_codec = cfg.filter.use_band_codec;
    fcfg.window_radius = cfg.filter.window_radius;
    fcfg.n_threads = cfg.filter.n_threads;

    fs::create_directories(cfg.output_dir);
    std::function<void(int, const gridloc::LikelihoodVolume&)> on_step;
    if (cfg.filter.dump_volume_every > 0) {
        const int every = cfg.filter.dump_volume_every;
        const std::string dir = cfg.output_dir;
        int count = 0;
        on_step = [every, dir, count](int t, const gridloc::LikelihoodVolume& vol) mutable {
            if (count++ % every == 0)
                gridloc::save_volume(dir + "/vol_" + frame_name(t) + ".lvol", vol);
        };
    }
    const auto steps = gridloc::run_filter(set.frames, cfg.grid, cfg.kernel,
                                           cfg.bands, fcfg, on_step);

    std::vector<gridloc::TimedPose> est_rows;
    for (std::size_t i = 0; i < steps.size(); ++i)
        est_rows.push_back({set.frames[i].t, steps[i].estimate});
    gridloc::write_trajectory_csv(cfg.output_dir + "/est.csv", est_rows);

    const auto dr = gridloc::dead_reckoning(set.start, set.frames);
    std::vector<gridloc::TimedPose> dr_rows;
    for (std::size_t i = 0; i < dr.size(); ++i)
        dr_rows.push_back({set.frames[i].t, dr[i]});
    gridloc::write_trajectory_csv(cfg.output_dir + "/dead_reckoning.csv",
                                  dr_rows);

    std::string diag =
        "t,propagated_mass,entropy,argmax_theta,argmax_x,argmax_y,"
        "argmax_value,fusion_reset,circular_std\n";
    char buf[220];
    for (const auto& step : steps) {
        const auto& d = step.diag;
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%d,%d,%d,%.9g,%d,%.9g\n",
                      d.t, d.propagated_mass, d.entropy, d.argmax.t_idx,
                      d.argmax.x_idx, d.argmax.y_idx, d.argmax_value,
                      d.fusion_reset ? 1 : 0, d.circular_std);
        diag += buf;
    }
    write_text(cfg.output_dir + "/diagnostics.csv", diag);

    std::cout << "localized " << steps.size() << " frames into "
              << cfg.output_dir << "\n";
    return 0;
}

// ---- eval ----

int cmd_eval(const std::string& gt_path,
             const std::vector<std::string>& est_paths,
             const std::string& out_path) {
    const auto gt_rows = gridloc::read_trajectory_csv(gt_path);
    std::map<int, gridloc::Pose2D> gt_by_t;
    for (const auto& row : gt_rows) gt_by_t[row.t] = row.pose;

    std::vector<std::pair<std::string, gridloc::TrajectoryRecord>> records;
    for (const std::string& path : est_paths) {
        const auto est_rows = gridloc::read_trajectory_csv(path);
        if (est_rows.empty())
            throw gridloc::data_error(path + ": no estimate rows");
        gridloc::TrajectoryRecord rec;
        for (const auto& row : est_rows) {
            const auto it = gt_by_t.find(row.t);
            if (it == gt_by_t.end())
                throw gridloc::data_error(path + ": t=" +
                                          std::to_string(row.t) +
                                          " has no ground-truth row in " +
                                          gt_path);
            rec.gt.push_back(it->second);
            rec.est.push_back(row.pose);
        }
        records.emplace_back(fs::path(path).stem().string(), std::move(rec));
    }
    const auto cmp = gridloc::compare_runs(records);
    const std::string csv = cmp.to_csv();
    std::cout << csv;
    if (!out_path.empty()) write_text(out_path, csv);
    return 0;
}

// ---- kernel-dump ----

int cmd_kernel_dump(const gridloc::RunConfig& cfg) {
    const auto rotated =
        gridloc::rotate_and_scale(cfg.kernel_dump_motion, cfg.grid);
    gridloc::MotionAccumulator acc(cfg.grid.theta_bins);
    const auto shifts = gridloc::accumulate(acc, rotated);
    const auto sigmas = gridloc::sigmas_from_motion(cfg.kernel_dump_motion,
                                                    cfg.noise, cfg.grid,
                                                    cfg.kernel);
    const auto kernel = gridloc::build_kernel(shifts, sigmas, cfg.kernel);
    const auto stacked = gridloc::stack_kernel(kernel, cfg.grid.theta_bins);
    fs::create_directories(cfg.output_dir);
    gridloc::write_pgm(cfg.output_dir + "/stacked.pgm", stacked);
    gridloc::save_stacked_kernel(cfg.output_dir + "/stacked.kstk", stacked);
    std::cout << "stacked kernel " << stacked.rows() << "x" << stacked.cols()
              << " (" << cfg.grid.theta_bins << " channels of "
              << cfg.kernel.k_theta << "x" << cfg.kernel.k_x << "x"
              << cfg.kernel.k_y << ") written to " << cfg.output_dir << "\n";
    return 0;
}

// ---- bench ----

struct Timing {
    double median_ms = 0.0;
    double std_ms = 0.0;
};

Timing summarize(std::vector<double> ms) {
    std::sort(ms.begin(), ms.end());
    const std::size_t mid = ms.size() / 2;
    Timing t;
    t.median_ms = ms.size() % 2 == 1 ? ms[mid]
                                     : 0.5 * (ms[mid - 1] + ms[mid]);
    double mean = 0.0, sq = 0.0;
    for (double v : ms) mean += v;
    mean /= ms.size();
    for (double v : ms) sq += (v - mean) * (v - mean);
    t.std_ms = std::sqrt(sq / ms.size());
    return t;
}

int cmd_bench(const gridloc::RunConfig& cfg, const std::string& out_path) {
    const gridloc::GridSpec& grid = cfg.grid;
    std::mt19937_64 rng(cfg.odometry_seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    gridloc::LikelihoodVolume vol{grid, {}};
    vol.values.resize(grid.cell_count());
    for (double& v : vol.values) v = uni(rng);
    gridloc::normalize(vol);

    gridloc::Heatmap h(grid.x_bins, grid.y_bins);
    for (float& v : h.values) v = static_cast<float>(uni(rng));

    gridloc::MotionAccumulator acc(grid.theta_bins);
    const auto rotated =
        gridloc::rotate_and_scale(cfg.kernel_dump_motion, grid);
    const auto shifts = gridloc::accumulate(acc, rotated);
    const auto sigmas = gridloc::sigmas_from_motion(cfg.kernel_dump_motion,
                                                    cfg.noise, grid, cfg.kernel);
    const auto kernel = gridloc::build_kernel(shifts, sigmas, cfg.kernel);

    std::vector<double> prop_ms, bayes_ms;
    for (int rep = 0; rep < cfg.bench.reps; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        auto moved = gridloc::propagate(vol, kernel, cfg.bench.n_threads);
        const auto t1 = std::chrono::steady_clock::now();
        auto fused = gridloc::bayes_update(moved, h);
        const auto t2 = std::chrono::steady_clock::now();
        prop_ms.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
        bayes_ms.push_back(
            std::chrono::duration<double, std::milli>(t2 - t1).count());
    }
    const Timing prop = summarize(prop_ms);
    const Timing bayes = summarize(bayes_ms);

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "volume [%d x %d x %d]  kernel [%d x %d x %d]  threads %d  "
                  "reps %d\n",
                  grid.theta_bins, grid.x_bins, grid.y_bins, cfg.kernel.k_theta,
                  cfg.kernel.k_x, cfg.kernel.k_y, cfg.bench.n_threads,
                  cfg.bench.reps);
    std::string report = buf;
    std::snprintf(buf, sizeof(buf),
                  "propagate:    median %.3f ms  std %.3f ms\n", prop.median_ms,
                  prop.std_ms);
    report += buf;
    std::snprintf(buf, sizeof(buf),
                  "bayes_update: median %.3f ms  std %.3f ms\n",
                  bayes.median_ms, bayes.std_ms);
    report += buf;
    std::cout << report;

    if (!out_path.empty()) {
        std::string csv =
            "op,median_ms,std_ms,reps,threads,theta_bins,x_bins,y_bins,"
            "k_theta,k_x,k_y\n";
        std::snprintf(buf, sizeof(buf), "propagate,%.6g,%.6g,%d,%d,%d,%d,%d,%d,%d,%d\n",
                      prop.median_ms, prop.std_ms, cfg.bench.reps,
                      cfg.bench.n_threads, grid.theta_bins, grid.x_bins,
                      grid.y_bins, cfg.kernel.k_theta, cfg.kernel.k_x,
                      cfg.kernel.k_y);
        csv += buf;
        std::snprintf(buf, sizeof(buf), "bayes_update,%.6g,%.6g,%d,%d,%d,%d,%d,%d,%d,%d\n",
                      bayes.median_ms, bayes.std_ms, cfg.bench.reps,
                      cfg.bench.n_threads, grid.theta_bins, grid.x_bins,
                      grid.y_bins, cfg.kernel.k_theta, cfg.kernel.k_x,
                      cfg.kernel.k_y);
        csv += buf;
        write_text(out_path, csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-based planar Markov localisation"};
    app.require_subcommand(1);

    std::string config_path, output_dir, frames_dir, out_path, gt_path;
    std::vector<std::string> est_paths;
    int dump_every = -1, reps = 0, threads = 0;

    CLI::App* sim = app.add_subcommand("simulate",
                                       "Generate a trajectory, odometry and "
                                       "observation frames");
    sim->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sim->add_option("--output-dir", output_dir, "overrides config output_dir");

    CLI::App* loc = app.add_subcommand("localize",
                                       "Run the filter over simulated or "
                                       "recorded frames");
    loc->add_option("--config", config_path, "JSON run configuration")
        ->required();
    loc->add_option("--frames", frames_dir,
                    "frame directory from 'simulate'; omit to simulate "
                    "in-memory");
    loc->add_option("--output-dir", output_dir, "overrides config output_dir");
    loc->add_option("--dump-volume-every", dump_every,
                    "write every k-th belief volume");

    CLI::App* ev = app.add_subcommand("eval",
                                      "Compare estimate trajectories against "
                                      "ground truth");
    ev->add_option("--gt", gt_path, "ground-truth trajectory CSV")->required();
    ev->add_option("--est", est_paths, "estimate CSVs")
        ->required()
        ->expected(-1);
    ev->add_option("--out", out_path, "also write the metrics CSV here");

    CLI::App* kd = app.add_subcommand("kernel-dump",
                                      "Write the stacked motion kernel as PGM "
                                      "and raw f32");
    kd->add_option("--config", config_path, "JSON run configuration")
        ->required();
    kd->add_option("--output-dir", output_dir, "overrides config output_dir");

    CLI::App* bench = app.add_subcommand("bench",
                                         "Time the propagate and fuse steps");
    bench->add_option("--config", config_path, "JSON run configuration")
        ->required();
    bench->add_option("--reps", reps, "overrides config bench.reps");
    bench->add_option("--threads", threads, "overrides config bench.threads");
    bench->add_option("--out", out_path, "also write timings as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (ev->parsed()) return cmd_eval(gt_path, est_paths, out_path);

        gridloc::RunConfig cfg = gridloc::load_run_config(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (sim->parsed()) {
            check_mode(cfg, "simulate");
            return cmd_simulate(cfg);
        }
        if (loc->parsed()) {
            check_mode(cfg, "localize");
            if (dump_every >= 0) cfg.filter.dump_volume_every = dump_every;
            cfg.validate();
            return cmd_localize(cfg, frames_dir);
        }
        if (kd->parsed()) {
            check_mode(cfg, "kernel-dump");
            return cmd_kernel_dump(cfg);
        }
        if (bench->parsed()) {
            check_mode(cfg, "bench");
            if (reps > 0) cfg.bench.reps = reps;
            if (threads > 0) cfg.bench.n_threads = threads;
            cfg.validate();
            return cmd_bench(cfg, out_path);
        }
    } catch (const gridloc::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gridloc::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
