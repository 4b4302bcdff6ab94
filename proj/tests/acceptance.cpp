// Acceptance gate: ten end-to-end criteria, one pass/fail line each.
// Tolerances are pinned next to each check. Exit code 0 only if all pass.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "gridloc/gridloc.hpp"

using namespace gridloc;

namespace {

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

GridSpec make_grid(int theta_bins, int x_bins, int y_bins, double res,
                   double origin_x, double origin_y) {
    GridSpec g;
    g.theta_bins = theta_bins;
    g.x_bins = x_bins;
    g.y_bins = y_bins;
    g.res_x = res;
    g.res_y = res;
    g.res_theta = kTwoPi / theta_bins;
    g.origin_x = origin_x;
    g.origin_y = origin_y;
    return g;
}

double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// belief mass within a Chebyshev XY window, summed over all theta slices
double window_mass(const LikelihoodVolume& vol, int cx, int cy, int radius) {
    double mass = 0.0;
    const GridSpec& g = vol.spec;
    for (int t = 0; t < g.theta_bins; ++t)
        for (int ix = std::max(0, cx - radius);
             ix <= std::min(g.x_bins - 1, cx + radius); ++ix)
            for (int iy = std::max(0, cy - radius);
                 iy <= std::min(g.y_bins - 1, cy + radius); ++iy)
                mass += vol.at(t, ix, iy);
    return mass;
}

// ---- criterion 1: fast propagation against the brute-force oracle ----

std::string check_oracle_equivalence() {
    const GridSpec g = make_grid(24, 48, 48, 0.5, -12.0, -12.0);
    KernelSpec kspec;
    kspec.k_theta = 7;
    kspec.k_x = 9;
    kspec.k_y = 9;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> tshift(-3, 3);
    std::uniform_int_distribution<int> xshift(-4, 4);
    std::uniform_real_distribution<double> sig(0.05, 3.0);
    std::uniform_int_distribution<int> cell_t(0, g.theta_bins - 1);
    std::uniform_int_distribution<int> cell_x(0, g.x_bins - 1);
    std::uniform_int_distribution<int> cell_y(0, g.y_bins - 1);

    double worst = 0.0;
    const int rounds = 30;
    for (int round = 0; round < rounds; ++round) {
        LikelihoodVolume vol{g, std::vector<double>(g.cell_count(), 0.0)};
        if (round % 3 == 0) {
            for (double& v : vol.values) v = uni(rng);
        } else if (round % 3 == 1) {
            // Dirac, with some placed on the XY borders
            const int ix = round % 6 == 1 ? 0 : cell_x(rng);
            const int iy = round % 6 == 4 ? g.y_bins - 1 : cell_y(rng);
            vol.at(cell_t(rng), ix, iy) = 1.0;
        } else {
            // smooth blob
            const double cx = 4.0 + 40.0 * uni(rng), cy = 4.0 + 40.0 * uni(rng);
            for (int t = 0; t < g.theta_bins; ++t)
                for (int ix = 0; ix < g.x_bins; ++ix)
                    for (int iy = 0; iy < g.y_bins; ++iy) {
                        const double dx = ix - cx, dy = iy - cy;
                        vol.at(t, ix, iy) =
                            std::exp(-(dx * dx + dy * dy) / 50.0);
                    }
        }
        normalize(vol);

        std::vector<IntegerShift> shifts(g.theta_bins);
        std::vector<AxisSigmas> sigmas(g.theta_bins);
        for (int c = 0; c < g.theta_bins; ++c) {
            shifts[c] = {xshift(rng), xshift(rng), tshift(rng)};
            sigmas[c] = {sig(rng), sig(rng), sig(rng)};
        }
        const auto fast = propagate(vol, build_kernel(shifts, sigmas, kspec));
        const auto ref = propagate_reference(vol, shifts, sigmas, kspec);
        worst = std::max(worst, linf(fast.values, ref.values));
    }
    if (worst > 1e-6)
        return fmt("worst Linf %.3g over %d instances exceeds 1e-6", worst,
                   rounds);
    return "";
}

// ---- criterion 2: probability mass conservation under propagation ----

std::string check_mass_conservation() {
    const GridSpec g = make_grid(12, 40, 40, 0.5, -10.0, -10.0);
    KernelSpec kspec;
    kspec.k_theta = 5;
    kspec.k_x = 9;
    kspec.k_y = 9;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> sh(-2, 2);
    std::uniform_real_distribution<double> sig(0.25, 1.5);

    // interior-supported mass: nothing can reach the XY borders in one step
    for (int round = 0; round < 10; ++round) {
        LikelihoodVolume vol{g, std::vector<double>(g.cell_count(), 0.0)};
        for (int t = 0; t < g.theta_bins; ++t)
            for (int ix = 12; ix < 28; ++ix)
                for (int iy = 12; iy < 28; ++iy)
                    vol.at(t, ix, iy) = uni(rng);
        normalize(vol);
        std::vector<IntegerShift> shifts(g.theta_bins);
        std::vector<AxisSigmas> sigmas(g.theta_bins);
        for (int c = 0; c < g.theta_bins; ++c) {
            shifts[c] = {sh(rng), sh(rng), sh(rng)};
            sigmas[c] = {sig(rng), sig(rng), sig(rng)};
        }
        double prenorm = 0.0;
        propagate(vol, build_kernel(shifts, sigmas, kspec), 1, &prenorm);
        if (std::abs(prenorm - 1.0) > 1e-6)
            return fmt("interior mass %.9f deviates from 1 by more than 1e-6",
                       prenorm);
    }

    // the theta axis wraps instead of truncating
    LikelihoodVolume vol{g, std::vector<double>(g.cell_count(), 0.0)};
    vol.at(g.theta_bins - 1, 20, 20) = 1.0;
    KernelSpec tight = kspec;
    tight.sigma_floor = 0.01;
    const std::vector<IntegerShift> up(g.theta_bins, IntegerShift{0, 0, 1});
    const std::vector<AxisSigmas> tiny(g.theta_bins,
                                       AxisSigmas{0.01, 0.01, 0.01});
    double prenorm = 0.0;
    const auto out = propagate(vol, build_kernel(up, tiny, tight), 1, &prenorm);
    if (std::abs(prenorm - 1.0) > 1e-9)
        return fmt("theta wrap lost mass: %.12f", prenorm);
    if (std::abs(out.at(0, 20, 20) - 1.0) > 1e-9)
        return fmt("theta shift from the last bin landed at %.12f in bin 0",
                   out.at(0, 20, 20));

    // XY truncation at a border still renormalizes to 1
    LikelihoodVolume corner{g, std::vector<double>(g.cell_count(), 0.0)};
    corner.at(0, 0, 0) = 1.0;
    const std::vector<IntegerShift> none(g.theta_bins, IntegerShift{0, 0, 0});
    const std::vector<AxisSigmas> wide(g.theta_bins, AxisSigmas{1.0, 2.0, 2.0});
    const auto trunc = propagate(corner, build_kernel(none, wide, kspec));
    const double total = total_mass(trunc);
    if (std::abs(total - 1.0) > 1e-9)
        return fmt("truncated volume renormalized to %.12f", total);
    return "";
}

// ---- criterion 3: stacked kernel layout ----

std::string check_stacked_layout() {
    // unit forward step on a 4-channel grid with near-Dirac width: each
    // column block must hold a single bright cell displaced along its
    // channel's heading, sitting in the diagonal (zero theta offset) block
    const GridSpec g = make_grid(4, 8, 8, 1.0, -4.0, -4.0);
    KernelSpec kspec;
    kspec.k_theta = 3;
    kspec.k_x = 5;
    kspec.k_y = 5;
    kspec.sigma_floor = 0.01;
    MotionAccumulator acc(4);
    const auto shifts =
        accumulate(acc, rotate_and_scale(RotTransRot(0.0, 1.0, 0.0), g));
    const std::vector<AxisSigmas> tiny(4, AxisSigmas{0.01, 0.01, 0.01});
    const auto stacked = stack_kernel(build_kernel(shifts, tiny, kspec), 4);

    const int hx = 2, hy = 2;
    const struct { int ch, dx, dy; } expect[4] = {
        {0, 1, 0}, {1, 0, 1}, {2, -1, 0}, {3, 0, -1}};
    for (const auto& e : expect) {
        const double v = stacked.at(e.ch * kspec.k_x + hx + e.dx,
                                    e.ch * kspec.k_y + hy + e.dy);
        if (std::abs(v - 1.0) > 1e-12)
            return fmt("channel %d: expected the unit tap at (%+d,%+d), got "
                       "%.6f",
                       e.ch, e.dx, e.dy, v);
    }
    double off_diag = 0.0;
    for (int rb = 0; rb < 4; ++rb)
        for (int cb = 0; cb < 4; ++cb)
            if (rb != cb)
                for (int kx = 0; kx < kspec.k_x; ++kx)
                    for (int ky = 0; ky < kspec.k_y; ++ky)
                        off_diag += stacked.at(rb * kspec.k_x + kx,
                                               cb * kspec.k_y + ky);
    if (off_diag != 0.0)
        return fmt("pure translation left %.3g in off-diagonal blocks",
                   off_diag);

    // a one-bin rotation moves every block down one row block, wrapping the
    // last channel back to row block 0
    MotionAccumulator acc2(4);
    const auto turn =
        accumulate(acc2, rotate_and_scale(RotTransRot(0.0, 0.0, kPi / 2), g));
    const auto stacked2 = stack_kernel(build_kernel(turn, tiny, kspec), 4);
    for (int c = 0; c < 4; ++c) {
        const int rb = (c + 1) % 4;
        const double v = stacked2.at(rb * kspec.k_x + hx, c * kspec.k_y + hy);
        if (std::abs(v - 1.0) > 1e-12)
            return fmt("rotation: channel %d row block %d holds %.6f", c, rb,
                       v);
    }
    return "";
}

// ---- criterion 4: sub-cell residual accounting ----

std::string check_residual_accounting() {
    const int channels = 3;
    MotionAccumulator acc(channels);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> step(-2.0, 2.0);
    double commanded[3][3] = {};  // [channel][axis] running totals
    long long emitted[3][3] = {};
    const int n_steps = 10000;
    for (int s = 0; s < n_steps; ++s) {
        RotatedMotionSet motion;
        motion.per_channel.resize(channels);
        for (int c = 0; c < channels; ++c) {
            motion.per_channel[c].s_x = step(rng);
            motion.per_channel[c].s_y = step(rng);
            motion.per_channel[c].d_theta = step(rng);
            commanded[c][0] += motion.per_channel[c].s_x;
            commanded[c][1] += motion.per_channel[c].s_y;
            commanded[c][2] += motion.per_channel[c].d_theta;
        }
        const auto shifts = accumulate(acc, motion);
        for (int c = 0; c < channels; ++c) {
            emitted[c][0] += shifts[c].i_x;
            emitted[c][1] += shifts[c].i_y;
            emitted[c][2] += shifts[c].i_theta;
            const double rx = acc.residual[c].x, ry = acc.residual[c].y,
                         rt = acc.residual[c].theta;
            if (rx < 0.0 || rx >= 1.0 || ry < 0.0 || ry >= 1.0 || rt < 0.0 ||
                rt >= 1.0)
                return fmt("step %d channel %d: residual (%.3f, %.3f, %.3f) "
                           "left [0, 1)",
                           s, c, rx, ry, rt);
        }
    }
    for (int c = 0; c < channels; ++c) {
        const double res[3] = {acc.residual[c].x, acc.residual[c].y,
                               acc.residual[c].theta};
        for (int axis = 0; axis < 3; ++axis) {
            const double recon =
                static_cast<double>(emitted[c][axis]) + res[axis];
            if (std::abs(recon - commanded[c][axis]) > 1e-9)
                return fmt("channel %d axis %d: emitted+residual %.12f != "
                           "commanded %.12f (|diff| > 1e-9)",
                           c, axis, recon, commanded[c][axis]);
        }
    }
    return "";
}

// ---- criterion 5: localisation beats its ablations ----

std::string check_localisation_comparison() {
    const GridSpec g = make_grid(36, 128, 128, 0.5, -31.75, -31.75);
    KernelSpec kspec;
    kspec.k_theta = 5;
    kspec.k_x = 9;
    kspec.k_y = 9;
    TrajectorySpec tspec;
    tspec.shape = TrajectoryShape::loop;
    tspec.step_length = 0.4;
    tspec.n_steps = 300;
    tspec.start = Pose2D(0.0, -20.0, 0.0);
    NoiseParams noise;
    noise.a1 = 0.1;
    noise.a2 = 0.005;
    noise.a3 = 0.05;
    noise.a4 = 0.05;
    OracleParams oracle;
    oracle.sigma_obs = 1.0;
    oracle.floor = 0.05;
    oracle.dropout_prob = 0.1;
    oracle.distractors.push_back({-8.0, 2.0, 0.5, true});

    const auto frames = simulate_frames(tspec, g, noise, oracle, 1001, 1002);

    FilterConfig cfg;
    cfg.init = FilterConfig::Init::dirac;
    cfg.init_pose = tspec.start;
    cfg.noise = noise;
    const auto full = run_filter(frames, g, kspec, BandSpec{}, cfg);

    FilterConfig sensor_cfg = cfg;
    sensor_cfg.use_motion = false;
    const auto snap = run_filter(frames, g, kspec, BandSpec{}, sensor_cfg);

    TrajectoryRecord rec_filter, rec_sensor, rec_odom;
    rec_odom.est = dead_reckoning(tspec.start, frames);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        rec_filter.gt.push_back(frames[i].gt_pose);
        rec_filter.est.push_back(full[i].estimate);
        rec_sensor.est.push_back(snap[i].estimate);
    }
    rec_sensor.gt = rec_filter.gt;
    rec_odom.gt = rec_filter.gt;

    const auto m_filter = ate(rec_filter);
    const auto m_sensor = ate(rec_sensor);
    const auto m_odom = ate(rec_odom);

    // premise: the odometry alone genuinely drifts (>= 5 m by the last step)
    const double end_drift =
        std::hypot(rec_odom.est.back().x - rec_odom.gt.back().x,
                   rec_odom.est.back().y - rec_odom.gt.back().y);
    if (end_drift < 5.0)
        return fmt("premise failed: raw odometry only drifted %.2f m "
                   "(need >= 5 m for a meaningful comparison)",
                   end_drift);
    if (m_filter.median_m > 1.0)
        return fmt("filter median error %.3f m exceeds 1.0 m (2 cells)",
                   m_filter.median_m);
    if (m_filter.rmse_m >= m_sensor.rmse_m)
        return fmt("filter rmse %.3f m is not below observation-only rmse "
                   "%.3f m",
                   m_filter.rmse_m, m_sensor.rmse_m);
    if (m_filter.rmse_m >= m_odom.rmse_m)
        return fmt("filter rmse %.3f m is not below raw-odometry rmse %.3f m",
                   m_filter.rmse_m, m_odom.rmse_m);
    return "";
}

// ---- criterion 6: a repeated-structure ghost is resolved by motion ----

std::string check_ghost_disambiguation() {
    const GridSpec g = make_grid(36, 128, 128, 0.5, -32.0, -32.0);
    KernelSpec kspec;
    // the waypoint corner turns 90 deg in a single frame: 9 bins at this
    // heading resolution, so the theta extent must reach +/-9
    kspec.k_theta = 19;
    kspec.k_x = 9;
    kspec.k_y = 9;
    TrajectorySpec tspec;
    tspec.shape = TrajectoryShape::waypoint_list;
    tspec.step_length = 0.5;
    tspec.n_steps = 120;
    tspec.start = Pose2D(10.0, -12.0, kPi / 2);
    tspec.waypoints = {{10.0, 12.0}, {-26.0, 12.0}};
    NoiseParams noise;
    noise.a2 = 0.001;
    noise.a3 = 0.01;
    OracleParams oracle;
    oracle.sigma_obs = 1.0;
    oracle.floor = 0.02;
    // a second, equally strong copy of the world 30 m to the west
    oracle.distractors.push_back({-30.0, 0.0, 1.0, true});

    const auto frames = simulate_frames(tspec, g, noise, oracle, 21, 22);

    FilterConfig cfg;
    cfg.init = FilterConfig::Init::uniform;
    cfg.noise = noise;

    std::string premise;
    double final_lock_mass = 0.0;
    int worst_late_cheb = 0;
    run_filter(frames, g, kspec, BandSpec{}, cfg,
               [&](int t, const LikelihoodVolume& belief) {
                   const SimFrame& frame = frames[t - 1];
                   const GridIndex gt_idx = pose_to_index(g, frame.gt_pose);
                   if (t == 40) {
                       const Pose2D ghost(frame.gt_pose.x - 30.0,
                                          frame.gt_pose.y, 0.0);
                       const GridIndex gidx = pose_to_index(g, ghost);
                       const double m_true =
                           window_mass(belief, gt_idx.x_idx, gt_idx.y_idx, 5);
                       const double m_ghost =
                           window_mass(belief, gidx.x_idx, gidx.y_idx, 5);
                       if (m_true < 0.2 || m_ghost < 0.2)
                           premise = fmt(
                               "premise failed: belief not bimodal before the "
                               "turn (true %.2f, ghost %.2f)",
                               m_true, m_ghost);
                   }
                   if (t >= 85) {
                       const GridIndex am = argmax_index(belief);
                       const int cheb =
                           std::max(std::abs(am.x_idx - gt_idx.x_idx),
                                    std::abs(am.y_idx - gt_idx.y_idx));
                       worst_late_cheb = std::max(worst_late_cheb, cheb);
                   }
                   if (t == frames.back().t)
                       final_lock_mass =
                           window_mass(belief, gt_idx.x_idx, gt_idx.y_idx, 8);
               });
    if (!premise.empty()) return premise;
    if (worst_late_cheb > 3)
        return fmt("argmax strayed %d cells from the truth after the ghost "
                   "left the map (limit 3)",
                   worst_late_cheb);
    if (final_lock_mass < 0.99)
        return fmt("only %.4f of the final belief sits within 8 cells of the "
                   "truth (need >= 0.99)",
                   final_lock_mass);
    return "";
}

// ---- criterion 7: likelihood band codec ----

std::string check_band_codec() {
    BandVolume bv(10, 2, 1);
    bv.at(9, 0, 0) = 1.0f;
    BandSpec spec;  // n_bands 10, top_n 3
    const auto decoded = decode_bands(bv, spec);
    if (std::abs(decoded.at(0, 0) - 0.40264280186539081) > 1e-7)
        return fmt("top-band one-hot decoded to %.9f, expected 0.402642802 "
                   "(tol 1e-7)",
                   decoded.at(0, 0));

    const BandVolume uniform(10, 3, 3);
    const auto flat = decode_bands(uniform, spec);
    const float expected = static_cast<float>(3.0 / 10.0);
    for (float v : flat.values)
        if (v != expected)
            return fmt("uniform scores decoded to %.9f, expected exactly "
                       "top_n/n_bands = %.9f",
                       v, expected);

    // encode -> decode never inverts the banded ordering, and strictly
    // separates likelihoods inside the summed top bands from the rest
    Heatmap ramp(10, 1);
    for (int i = 0; i < 10; ++i)
        ramp.at(i, 0) = 0.05f + 0.1f * static_cast<float>(i);
    const auto round = decode_bands(encode_bands(ramp, spec), spec);
    for (int i = 1; i < 10; ++i)
        if (round.at(i, 0) < round.at(i - 1, 0))
            return fmt("band round trip inverted the order at band %d", i);
    if (round.at(7, 0) <= round.at(6, 0))
        return "decode does not separate the top bands from the rest";
    return "";
}

// ---- criterion 8: trajectory error metrics ----

std::string check_metrics() {
    TrajectoryRecord rec;
    rec.gt = {Pose2D(0, 0, 0), Pose2D(1, 1, 0), Pose2D(-2, 0, 0)};
    rec.est = {Pose2D(0, 0, 0), Pose2D(4, 1, 0), Pose2D(-2, 4, 0)};
    const auto m = ate(rec);  // translational errors 0, 3, 4
    const struct { const char* name; double got, want; } checks[] = {
        {"mean", m.mean_m, 2.3333333333333335},
        {"rmse", m.rmse_m, 2.886751345948129},
        {"median", m.median_m, 3.0},
        {"std", m.std_m, 1.6996731711975948},
    };
    for (const auto& c : checks)
        if (std::abs(c.got - c.want) > 1e-9)
            return fmt("%s = %.12f, expected %.12f (tol 1e-9)", c.name, c.got,
                       c.want);
    if (std::abs(m.rmse_m * m.rmse_m -
                 (m.mean_m * m.mean_m + m.std_m * m.std_m)) > 1e-12)
        return "rmse^2 != mean^2 + std^2";

    const auto cmp = compare_runs({{"a", rec}, {"b", {rec.gt, rec.gt}}});
    if (cmp.ranked[0].name != "b" || cmp.ranked[1].name != "a")
        return "compare_runs did not rank the perfect run first";
    return "";
}

// ---- criterion 9: propagation speed and threading ----

double median_ms(std::vector<double>& samples) {
    std::sort(samples.begin(), samples.end());
    const std::size_t mid = samples.size() / 2;
    return samples.size() % 2 == 1 ? samples[mid]
                                   : 0.5 * (samples[mid - 1] + samples[mid]);
}

struct BenchSetup {
    LikelihoodVolume vol;
    OdometryKernel kernel;
};

BenchSetup bench_setup(std::uint64_t seed) {
    const GridSpec g = make_grid(72, 256, 256, 0.5, -63.75, -63.75);
    const KernelSpec kspec;  // 15 x 21 x 21 defaults
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    LikelihoodVolume vol{g, std::vector<double>(g.cell_count())};
    for (double& v : vol.values) v = uni(rng);
    normalize(vol);
    MotionAccumulator acc(g.theta_bins);
    const auto shifts =
        accumulate(acc, rotate_and_scale(RotTransRot(0.05, 1.0, 0.05), g));
    const std::vector<AxisSigmas> sigmas(g.theta_bins,
                                         AxisSigmas{1.0, 1.5, 1.5});
    return {std::move(vol), build_kernel(shifts, sigmas, kspec)};
}

double time_propagate(const BenchSetup& setup, int threads, int reps) {
    std::vector<double> samples;
    samples.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto out = propagate(setup.vol, setup.kernel, threads);
        const auto t1 = std::chrono::steady_clock::now();
        samples.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
        if (out.values[0] < -1.0) std::abort();  // keep the result alive
    }
    return median_ms(samples);
}

std::string check_single_thread_speed() {
    const auto setup = bench_setup(5);
    const double ms = time_propagate(setup, 1, 5);
    if (ms >= 500.0)
        return fmt("single-thread propagate median %.1f ms (limit 500 ms)",
                   ms);
    return "";
}

std::string check_thread_scaling() {
    const auto setup = bench_setup(6);
    const double ms1 = time_propagate(setup, 1, 5);
    const double ms8 = time_propagate(setup, 8, 5);
    const double speedup = ms1 / ms8;
    if (speedup < 3.0)
        return fmt("8-thread speedup %.2fx (need >= 3.0x; 1 thread %.1f ms, "
                   "8 threads %.1f ms, hardware_concurrency=%u)",
                   speedup, ms1, ms8, std::thread::hardware_concurrency());
    return "";
}

// ---- criterion 10: CLI error policy ----

int shell(const std::string& cmd) { return std::system(cmd.c_str()); }

int run_cli(const std::string& cli, const std::string& args) {
    const int status = shell(cli + " " + args + " >/dev/null 2>&1");
    if (status < 0 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

std::string write_text(const std::string& path, const std::string& text) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) return "cannot write " + path;
    std::fputs(text.c_str(), f);
    std::fclose(f);
    return "";
}

std::string check_cli_error_policy() {
    const char* cli = std::getenv("GRIDLOC_CLI");
    if (!cli || !*cli)
        return "GRIDLOC_CLI is not set; cannot locate the CLI binary";
    const std::string tmp = "acceptance_cli_tmp";
    if (shell("rm -rf " + tmp + " && mkdir -p " + tmp) != 0)
        return "cannot set up " + tmp;

    const std::string good_cfg = tmp + "/good.json";
    std::string err = write_text(good_cfg, R"({
        "grid": {"theta_bins": 8, "x_bins": 24, "y_bins": 24,
                 "origin_x": -6.0, "origin_y": -6.0},
        "kernel": {"k_theta": 3, "k_x": 5, "k_y": 5},
        "trajectory": {"shape": "loop", "step_length": 0.4, "n_steps": 6},
        "output_dir": ")" + tmp + R"(/run"
    })");
    if (!err.empty()) return err;
    const std::string bad_cfg = tmp + "/bad.json";
    err = write_text(bad_cfg, R"({"gird": {}})");
    if (!err.empty()) return err;

    int code = run_cli(cli, "simulate --config " + good_cfg);
    if (code != 0) return fmt("clean simulate exited %d, expected 0", code);
    code = run_cli(cli, "simulate --config " + bad_cfg);
    if (code != 2)
        return fmt("unknown config key exited %d, expected 2", code);
    if (shell("rm -f " + tmp + "/run/obs/000003.hmap") != 0)
        return "cannot remove the observation file";
    code = run_cli(cli, "localize --config " + good_cfg + " --frames " + tmp +
                            "/run");
    if (code != 3)
        return fmt("missing frame data exited %d, expected 3", code);
    if (shell("rm -rf " + tmp) != 0) return "cleanup failed";
    return "";
}

struct Check {
    int id;
    const char* name;
    std::function<std::string()> run;
};

}  // namespace

int main() {
    const std::vector<Check> checks = {
        {1,
         "separable propagation matches the brute-force oracle (Linf <= 1e-6)",
         check_oracle_equivalence},
        {2, "propagation conserves interior mass and wraps theta (tol 1e-6)",
         check_mass_conservation},
        {3, "stacked kernel blocks encode per-heading displacement",
         check_stacked_layout},
        {4, "sub-cell residuals reconcile with commanded motion (tol 1e-9)",
         check_residual_accounting},
        {5, "filter beats observation-only and raw odometry on a noisy loop",
         check_localisation_comparison},
        {6, "motion resolves a symmetric ghost after the trajectory turns",
         check_ghost_disambiguation},
        {7, "band codec: pinned decode values, order-preserving round trip",
         check_band_codec},
        {8, "trajectory metrics match pinned statistics (tol 1e-9)",
         check_metrics},
        {9, "single-thread propagate under 500 ms at the reference size",
         check_single_thread_speed},
        {9, "propagate speeds up >= 3x with 8 threads", check_thread_scaling},
        {10, "CLI exit codes: 0 clean, 2 config errors, 3 data errors",
         check_cli_error_policy},
    };
    std::map<int, bool> criterion_ok;
    for (const Check& c : checks) {
        std::string detail;
        try {
            detail = c.run();
        } catch (const std::exception& e) {
            detail = std::string("unexpected exception: ") + e.what();
        }
        if (detail.empty()) {
            std::printf("[%2d] PASS  %s\n", c.id, c.name);
            criterion_ok.emplace(c.id, true);
        } else {
            std::printf("[%2d] FAIL  %s (%s)\n", c.id, c.name, detail.c_str());
            criterion_ok[c.id] = false;
        }
        std::fflush(stdout);
    }
    int passed = 0;
    for (const auto& [id, ok] : criterion_ok)
        if (ok) ++passed;
    std::printf("acceptance: %d/%d criteria passed\n", passed,
                static_cast<int>(criterion_ok.size()));
    return passed == static_cast<int>(criterion_ok.size()) ? 0 : 1;
}
