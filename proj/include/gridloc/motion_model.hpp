#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gridloc/errors.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/pose.hpp"

namespace gridloc {

// Relative planar motion decomposed as rotate, translate forward, rotate.
struct RotTransRot {
    double d_theta1 = 0.0;  // radians, wrapped
    double d_x = 0.0;       // metres; negative when reversing
    double d_theta2 = 0.0;  // radians, wrapped

    RotTransRot() = default;
    RotTransRot(double r1, double x, double r2)
        : d_theta1(wrap_angle(r1)), d_x(x), d_theta2(wrap_angle(r2)) {}
};

// Odometry noise coefficients: a1 rotation noise from rotation, a2 rotation
// noise from translation, a3 translation noise from translation, a4
// translation noise from rotation.
struct NoiseParams {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;

    void validate() const {
        if (a1 < 0.0 || a2 < 0.0 || a3 < 0.0 || a4 < 0.0)
            throw config_error("noise: coefficients must be >= 0");
    }
};

// Motion expressed in grid-cell units for one theta channel.
struct MotionVector {
    double s_x = 0.0;
    double s_y = 0.0;
    double d_theta = 0.0;
};

// One MotionVector per theta channel; d_theta is shared by construction.
struct RotatedMotionSet {
    std::vector<MotionVector> per_channel;
};

struct IntegerShift {
    long long i_x = 0;
    long long i_y = 0;
    long long i_theta = 0;
};

// Sub-cell displacement carried between updates, per channel, every component
// in [0, 1) cells.
struct MotionAccumulator {
    struct Residual {
        double x = 0.0;
        double y = 0.0;
        double theta = 0.0;
    };
    std::vector<Residual> residual;

    MotionAccumulator() = default;
    explicit MotionAccumulator(int theta_bins) : residual(theta_bins) {}
};

inline RotTransRot decompose_motion(const Pose2D& prev, const Pose2D& curr) {
    const double dx = curr.x - prev.x;
    const double dy = curr.y - prev.y;
    const double trans = std::hypot(dx, dy);
    if (trans == 0.0)
        return RotTransRot(0.0, 0.0, angle_diff(curr.theta(), prev.theta()));
    const double r1 = wrap_angle(std::atan2(dy, dx) - prev.theta());
    const double r2 = wrap_angle(curr.theta() - prev.theta() - r1);
    return RotTransRot(r1, trans, r2);
}

inline Pose2D compose_motion(const Pose2D& prev, const RotTransRot& m) {
    const double heading = prev.theta() + m.d_theta1;
    return Pose2D(prev.x + m.d_x * std::cos(heading),
                  prev.y + m.d_x * std::sin(heading),
                  heading + m.d_theta2);
}

// Perturbs each component with zero-mean Gaussian noise whose variance grows
// with the commanded motion. All coefficients zero reproduces the input
// exactly.
inline RotTransRot sample_noisy(const RotTransRot& m, const NoiseParams& noise,
                                std::mt19937_64& rng) {
    noise.validate();
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double r1_sq = m.d_theta1 * m.d_theta1;
    const double r2_sq = m.d_theta2 * m.d_theta2;
    const double x_sq = m.d_x * m.d_x;
    const double std_r1 = std::sqrt(noise.a1 * r1_sq + noise.a2 * x_sq);
    const double std_x = std::sqrt(noise.a3 * x_sq + noise.a4 * (r1_sq + r2_sq));
    const double std_r2 = std::sqrt(noise.a1 * r2_sq + noise.a2 * x_sq);
    const double r1 = m.d_theta1 + gauss(rng) * std_r1;
    const double x = m.d_x + gauss(rng) * std_x;
    const double r2 = m.d_theta2 + gauss(rng) * std_r2;
    return RotTransRot(r1, x, r2);
}

inline RotTransRot sample_noisy(const RotTransRot& m, const NoiseParams& noise,
                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_noisy(m, noise, rng);
}

// Express the step in every channel's heading frame, scaled to cell units.
// The rotation by the channel centre keeps the step length: the scaled
// vector maps back to a displacement of exactly |d_x| metres.
inline RotatedMotionSet rotate_and_scale(const RotTransRot& m,
                                         const GridSpec& spec) {
    spec.validate();
    const double vx = m.d_x * std::cos(m.d_theta1);
    const double vy = m.d_x * std::sin(m.d_theta1);
    const double d_theta_cells = (m.d_theta1 + m.d_theta2) / spec.res_theta;
    RotatedMotionSet out;
    out.per_channel.resize(spec.theta_bins);
    // cos/sin of the channel centres leave ~1e-16 dust on axis-aligned
    // motion; snap it so exact cardinal steps survive the floor split exactly
    auto snap = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
    for (int c = 0; c < spec.theta_bins; ++c) {
        const double tc = spec.theta_centre(c);
        const double ct = std::cos(tc), st = std::sin(tc);
        out.per_channel[c].s_x = snap((ct * vx - st * vy) / spec.res_x);
        out.per_channel[c].s_y = snap((st * vx + ct * vy) / spec.res_y);
        out.per_channel[c].d_theta = snap(d_theta_cells);
    }
    return out;
}

// Fold one step into the running residual and emit the whole-cell part.
// The invariant shift + new_residual == old_residual + step holds exactly,
// so no motion is ever lost to rounding across updates.
inline std::vector<IntegerShift> accumulate(MotionAccumulator& acc,
                                            const RotatedMotionSet& step) {
    if (acc.residual.size() != step.per_channel.size())
        throw data_error("accumulate: accumulator has " +
                         std::to_string(acc.residual.size()) +
                         " channels but the step has " +
                         std::to_string(step.per_channel.size()));
    auto split = [](double& residual, double step_component) -> long long {
        const double total = residual + step_component;
        double whole = std::floor(total);
        double frac = total - whole;
        if (frac >= 1.0) {  // total just below an integer can round frac up
            frac -= 1.0;
            whole += 1.0;
        }
        residual = frac;
        return static_cast<long long>(whole);
    };
    std::vector<IntegerShift> shifts(step.per_channel.size());
    for (std::size_t c = 0; c < shifts.size(); ++c) {
        shifts[c].i_x = split(acc.residual[c].x, step.per_channel[c].s_x);
        shifts[c].i_y = split(acc.residual[c].y, step.per_channel[c].s_y);
        shifts[c].i_theta = split(acc.residual[c].theta, step.per_channel[c].d_theta);
    }
    return shifts;
}

}  // namespace gridloc
