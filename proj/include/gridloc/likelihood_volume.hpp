#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gridloc/errors.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/heatmap.hpp"

namespace gridloc {

// Multiplicative floor applied to sensor likelihoods during fusion so that no
// hypothesis is ever annihilated by a single observation.
inline constexpr double kSensorFloor = 1e-6;

// Dense belief over (theta, x, y), layout [theta][x][y] row-major.
struct LikelihoodVolume {
    GridSpec spec;
    std::vector<double> values;

    std::size_t linear_index(int t, int ix, int iy) const {
        return (static_cast<std::size_t>(t) * spec.x_bins + ix) * spec.y_bins +
               iy;
    }
    double& at(int t, int ix, int iy) { return values[linear_index(t, ix, iy)]; }
    const double& at(int t, int ix, int iy) const {
        return values[linear_index(t, ix, iy)];
    }
    std::size_t plane_size() const {
        return static_cast<std::size_t>(spec.x_bins) * spec.y_bins;
    }
    std::span<double> slice(int t) {
        return {values.data() + t * plane_size(), plane_size()};
    }
    std::span<const double> slice(int t) const {
        return {values.data() + t * plane_size(), plane_size()};
    }
};

inline LikelihoodVolume init_uniform(const GridSpec& spec) {
    spec.validate();
    LikelihoodVolume vol{spec, {}};
    vol.values.assign(spec.cell_count(), 1.0 / spec.cell_count());
    return vol;
}

inline LikelihoodVolume init_dirac(const GridSpec& spec, const Pose2D& pose) {
    spec.validate();
    const GridIndex idx = pose_to_index(spec, pose);
    LikelihoodVolume vol{spec, std::vector<double>(spec.cell_count(), 0.0)};
    vol.at(idx.t_idx, idx.x_idx, idx.y_idx) = 1.0;
    return vol;
}

// Summed per slice first so the grand total stays accurate on large volumes.
inline double total_mass(const LikelihoodVolume& vol) {
    double total = 0.0;
    for (int t = 0; t < vol.spec.theta_bins; ++t) {
        double s = 0.0;
        for (double v : vol.slice(t)) s += v;
        total += s;
    }
    return total;
}

inline void normalize(LikelihoodVolume& vol) {
    const double total = total_mass(vol);
    if (!(total > 0.0) || !std::isfinite(total))
        throw data_error("normalize: volume has no probability mass");
    const double inv = 1.0 / total;
    for (double& v : vol.values) v *= inv;
}

inline double entropy(const LikelihoodVolume& vol) {
    double h = 0.0;
    for (double v : vol.values)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

// Ties resolve to the lowest linear index.
inline GridIndex argmax_index(const LikelihoodVolume& vol) {
    if (vol.values.empty()) throw data_error("argmax_index: empty volume");
    std::size_t best = 0;
    double best_value = vol.values[0];
    for (std::size_t i = 1; i < vol.values.size(); ++i) {
        if (vol.values[i] > best_value) {
            best_value = vol.values[i];
            best = i;
        }
    }
    const std::size_t plane = vol.plane_size();
    const int t = static_cast<int>(best / plane);
    const std::size_t rest = best % plane;
    return GridIndex{t, static_cast<int>(rest / vol.spec.y_bins),
                     static_cast<int>(rest % vol.spec.y_bins)};
}

// Posterior ∝ prior * max(sensor, kSensorFloor), with the XY heatmap applied
// identically to every theta slice. A posterior with no mass (or a non-finite
// one) resets to uniform instead of failing; *reset_to_uniform reports that.
inline LikelihoodVolume bayes_update(const LikelihoodVolume& prior,
                                     const Heatmap& sensor_xy,
                                     bool* reset_to_uniform = nullptr) {
    const GridSpec& spec = prior.spec;
    if (sensor_xy.x_bins != spec.x_bins || sensor_xy.y_bins != spec.y_bins)
        throw data_error("bayes_update: heatmap is " +
                         std::to_string(sensor_xy.x_bins) + "x" +
                         std::to_string(sensor_xy.y_bins) + " but the grid is " +
                         std::to_string(spec.x_bins) + "x" +
                         std::to_string(spec.y_bins));
    if (reset_to_uniform) *reset_to_uniform = false;

    std::vector<double> weight(sensor_xy.values.size());
    for (std::size_t i = 0; i < weight.size(); ++i) {
        const float s = sensor_xy.values[i];
        if (s < 0.0f)
            throw data_error("bayes_update: sensor likelihoods must be >= 0");
        weight[i] = std::max(static_cast<double>(s), kSensorFloor);
    }

    LikelihoodVolume out{spec, std::vector<double>(prior.values.size())};
    double total = 0.0;
    const std::size_t plane = prior.plane_size();
    for (int t = 0; t < spec.theta_bins; ++t) {
        const double* p = prior.values.data() + t * plane;
        double* o = out.values.data() + t * plane;
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
            o[i] = p[i] * weight[i];
            s += o[i];
        }
        total += s;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        if (reset_to_uniform) *reset_to_uniform = true;
        return init_uniform(spec);
    }
    const double inv = 1.0 / total;
    for (double& v : out.values) v *= inv;
    return out;
}

struct Covariance2x2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

struct PoseEstimate {
    Pose2D pose;
    Covariance2x2 covariance;
    double circular_std = 0.0;  // of the heading, in radians
};

// Continuous pose from a normalized volume: a weighted mean over the cells
// within window_radius (Chebyshev, XY) of the argmax, taken across all theta
// slices. The heading is the circular mean; when the heading mass cancels the
// argmax bin centre is reported instead and circular_std saturates.
inline PoseEstimate extract_pose(const LikelihoodVolume& vol,
                                 int window_radius = 8) {
    if (window_radius < 0)
        throw config_error("extract_pose: window_radius must be >= 0");
    if (vol.values.empty()) throw data_error("extract_pose: empty volume");
    if (std::abs(total_mass(vol) - 1.0) > 1e-6)
        throw data_error("extract_pose: volume is not normalized");

    const GridSpec& spec = vol.spec;
    const GridIndex peak = argmax_index(vol);
    const int x0 = std::max(0, peak.x_idx - window_radius);
    const int x1 = std::min(spec.x_bins - 1, peak.x_idx + window_radius);
    const int y0 = std::max(0, peak.y_idx - window_radius);
    const int y1 = std::min(spec.y_bins - 1, peak.y_idx + window_radius);

    double w_sum = 0.0, sx = 0.0, sy = 0.0;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    double c_sum = 0.0, s_sum = 0.0;
    for (int t = 0; t < spec.theta_bins; ++t) {
        const double theta = spec.theta_centre(t);
        const double ct = std::cos(theta), st = std::sin(theta);
        double wt = 0.0;
        for (int ix = x0; ix <= x1; ++ix) {
            const double wx = spec.x_centre(ix);
            for (int iy = y0; iy <= y1; ++iy) {
                const double w = vol.at(t, ix, iy);
                if (w <= 0.0) continue;
                const double wy = spec.y_centre(iy);
                w_sum += w;
                wt += w;
                sx += w * wx;
                sy += w * wy;
                sxx += w * wx * wx;
                sxy += w * wx * wy;
                syy += w * wy * wy;
            }
        }
        c_sum += wt * ct;
        s_sum += wt * st;
    }

    const double mean_x = sx / w_sum;
    const double mean_y = sy / w_sum;
    Covariance2x2 cov;
    cov.xx = std::max(0.0, sxx / w_sum - mean_x * mean_x);
    cov.xy = sxy / w_sum - mean_x * mean_y;
    cov.yy = std::max(0.0, syy / w_sum - mean_y * mean_y);

    const double r_bar = std::min(1.0, std::hypot(c_sum, s_sum) / w_sum);
    const double theta = r_bar < 1e-9 ? spec.theta_centre(peak.t_idx)
                                      : std::atan2(s_sum, c_sum);
    PoseEstimate est;
    est.pose = Pose2D(mean_x, mean_y, theta);
    est.covariance = cov;
    est.circular_std = std::sqrt(-2.0 * std::log(std::max(r_bar, 1e-12)));
    return est;
}

}  // namespace gridloc
