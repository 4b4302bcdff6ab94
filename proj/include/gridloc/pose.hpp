#pragma once

#include <cmath>

namespace gridloc {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Wrap an angle to [-pi, pi).
inline double wrap_angle(double theta) {
    const double w = std::remainder(theta, kTwoPi);
    return w < kPi ? w : w - kTwoPi;
}

// Shortest signed rotation from b to a.
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

// Planar pose. The heading is kept wrapped to [-pi, pi) at all times.
class Pose2D {
public:
    double x = 0.0;
    double y = 0.0;

    Pose2D() = default;
    Pose2D(double px, double py, double heading)
        : x(px), y(py), theta_(wrap_angle(heading)) {}

    double theta() const { return theta_; }
    void set_theta(double heading) { theta_ = wrap_angle(heading); }

private:
    double theta_ = 0.0;
};

}  // namespace gridloc
