#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "gridloc/errors.hpp"
#include "gridloc/pose.hpp"

namespace gridloc {

// Discretisation of planar pose space into theta slices over an XY plane.
// Cell (0,0) of every slice is centred on (origin_x, origin_y). Theta bin 0
// is centred on heading 0 and bin c covers
// [c*res_theta - res_theta/2, c*res_theta + res_theta/2).
struct GridSpec {
    int theta_bins = 1;
    int x_bins = 1;
    int y_bins = 1;
    double res_x = 1.0;         // metres per cell
    double res_y = 1.0;         // metres per cell
    double res_theta = kTwoPi;  // radians per bin; theta_bins * res_theta == 2*pi
    double origin_x = 0.0;      // world position of the centre of cell (0,0)
    double origin_y = 0.0;

    std::size_t cell_count() const {
        return static_cast<std::size_t>(theta_bins) * x_bins * y_bins;
    }
    double theta_centre(int t) const { return wrap_angle(t * res_theta); }
    double x_centre(int ix) const { return origin_x + ix * res_x; }
    double y_centre(int iy) const { return origin_y + iy * res_y; }

    void validate() const {
        if (theta_bins < 1 || x_bins < 1 || y_bins < 1)
            throw config_error("grid: bin counts must be >= 1");
        if (!(res_x > 0.0) || !(res_y > 0.0) || !(res_theta > 0.0))
            throw config_error("grid: resolutions must be > 0");
        if (std::abs(theta_bins * res_theta - kTwoPi) > 1e-9)
            throw config_error("grid: theta_bins * res_theta must equal 2*pi");
    }
};

struct GridIndex {
    int t_idx = 0;
    int x_idx = 0;
    int y_idx = 0;
    bool operator==(const GridIndex&) const = default;
};

namespace detail {
// Index of the cell whose centre is nearest; the boundary between cells
// belongs to the upper cell.
inline long long nearest_cell(double value, double origin, double res) {
    return static_cast<long long>(std::floor((value - origin) / res + 0.5));
}
}  // namespace detail

inline bool in_bounds(const GridSpec& spec, const Pose2D& pose) {
    const long long ix = detail::nearest_cell(pose.x, spec.origin_x, spec.res_x);
    const long long iy = detail::nearest_cell(pose.y, spec.origin_y, spec.res_y);
    return ix >= 0 && ix < spec.x_bins && iy >= 0 && iy < spec.y_bins;
}

inline GridIndex pose_to_index(const GridSpec& spec, const Pose2D& pose) {
    const long long ix = detail::nearest_cell(pose.x, spec.origin_x, spec.res_x);
    const long long iy = detail::nearest_cell(pose.y, spec.origin_y, spec.res_y);
    if (ix < 0 || ix >= spec.x_bins || iy < 0 || iy >= spec.y_bins)
        throw out_of_bounds("pose (" + std::to_string(pose.x) + ", " +
                            std::to_string(pose.y) + ") is outside the grid");
    long long t = detail::nearest_cell(pose.theta(), 0.0, spec.res_theta) %
                  spec.theta_bins;
    if (t < 0) t += spec.theta_bins;
    return GridIndex{static_cast<int>(t), static_cast<int>(ix),
                     static_cast<int>(iy)};
}

// Pose at the centre of a cell.
inline Pose2D index_to_pose(const GridSpec& spec, const GridIndex& idx) {
    return Pose2D(spec.x_centre(idx.x_idx), spec.y_centre(idx.y_idx),
                  idx.t_idx * spec.res_theta);
}

}  // namespace gridloc
