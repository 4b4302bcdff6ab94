#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gridloc/errors.hpp"
#include "gridloc/likelihood_volume.hpp"
#include "gridloc/motion_model.hpp"
#include "gridloc/parallel.hpp"

namespace gridloc {

// Kernel extents (cells, odd) and the bounds applied to the per-axis
// Gaussian stds. sigma_scale_* adds extra std per cell of commanded shift to
// absorb sub-cell quantisation of fast motion.
struct KernelSpec {
    int k_theta = 15;
    int k_x = 21;
    int k_y = 21;
    double sigma_floor = 0.25;        // cells
    double sigma_scale_theta = 0.0;
    double sigma_scale_x = 0.0;
    double sigma_scale_y = 0.0;

    int half_theta() const { return (k_theta - 1) / 2; }
    int half_x() const { return (k_x - 1) / 2; }
    int half_y() const { return (k_y - 1) / 2; }

    void validate() const {
        if (k_theta < 1 || k_x < 1 || k_y < 1)
            throw config_error("kernel: extents must be >= 1");
        if (k_theta % 2 == 0 || k_x % 2 == 0 || k_y % 2 == 0)
            throw config_error("kernel: extents must be odd");
        if (!(sigma_floor > 0.0))
            throw config_error("kernel: sigma_floor must be > 0");
        if (sigma_scale_theta < 0.0 || sigma_scale_x < 0.0 || sigma_scale_y < 0.0)
            throw config_error("kernel: sigma scales must be >= 0");
    }
};

// Per-axis Gaussian stds in cells, one triple per theta channel.
struct AxisSigmas {
    double theta = 0.0;
    double x = 0.0;
    double y = 0.0;
};

// Discrete Gaussian taps with the mean at centre + shift, renormalized over
// the window. The shift must fit inside the half-extent so the mean tap is
// always present.
inline std::vector<double> gaussian_taps(int extent, long long shift,
                                         double sigma) {
    const int half = (extent - 1) / 2;
    std::vector<double> taps(extent);
    double sum = 0.0;
    for (int i = 0; i < extent; ++i) {
        const double d = (i - half) - static_cast<double>(shift);
        taps[i] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// One separable 3D Gaussian kernel per theta channel. per_channel holds the
// dense [k_theta][k_x][k_y] outer product; each kernel sums to 1.
struct OdometryKernel {
    KernelSpec spec;
    int theta_bins = 0;
    std::vector<std::vector<double>> theta_factors;  // [channel][k_theta]
    std::vector<std::vector<double>> x_factors;      // [channel][k_x]
    std::vector<std::vector<double>> y_factors;      // [channel][k_y]
    std::vector<std::vector<double>> per_channel;    // [channel][kt][kx][ky]

    double kernel_value(int c, int kt, int kx, int ky) const {
        return per_channel[c][(static_cast<std::size_t>(kt) * spec.k_x + kx) *
                                  spec.k_y +
                              ky];
    }
};

inline OdometryKernel build_kernel(const std::vector<IntegerShift>& shifts,
                                   const std::vector<AxisSigmas>& sigmas,
                                   const KernelSpec& spec) {
    spec.validate();
    if (shifts.empty() || shifts.size() != sigmas.size())
        throw data_error("build_kernel: need one shift and one sigma triple "
                         "per theta channel");
    OdometryKernel kernel;
    kernel.spec = spec;
    kernel.theta_bins = static_cast<int>(shifts.size());
    kernel.theta_factors.resize(shifts.size());
    kernel.x_factors.resize(shifts.size());
    kernel.y_factors.resize(shifts.size());
    kernel.per_channel.resize(shifts.size());
    for (std::size_t c = 0; c < shifts.size(); ++c) {
        const IntegerShift& sh = shifts[c];
        if (std::llabs(sh.i_theta) > spec.half_theta())
            throw kernel_overflow(static_cast<int>(c), 't', sh.i_theta,
                                  spec.half_theta());
        if (std::llabs(sh.i_x) > spec.half_x())
            throw kernel_overflow(static_cast<int>(c), 'x', sh.i_x,
                                  spec.half_x());
        if (std::llabs(sh.i_y) > spec.half_y())
            throw kernel_overflow(static_cast<int>(c), 'y', sh.i_y,
                                  spec.half_y());
        const double st = std::max(sigmas[c].theta, spec.sigma_floor);
        const double sx = std::max(sigmas[c].x, spec.sigma_floor);
        const double sy = std::max(sigmas[c].y, spec.sigma_floor);
        kernel.theta_factors[c] = gaussian_taps(spec.k_theta, sh.i_theta, st);
        kernel.x_factors[c] = gaussian_taps(spec.k_x, sh.i_x, sx);
        kernel.y_factors[c] = gaussian_taps(spec.k_y, sh.i_y, sy);

        std::vector<double>& dense = kernel.per_channel[c];
        dense.resize(static_cast<std::size_t>(spec.k_theta) * spec.k_x *
                     spec.k_y);
        std::size_t idx = 0;
        for (int kt = 0; kt < spec.k_theta; ++kt)
            for (int kx = 0; kx < spec.k_x; ++kx)
                for (int ky = 0; ky < spec.k_y; ++ky)
                    dense[idx++] = kernel.theta_factors[c][kt] *
                                   kernel.x_factors[c][kx] *
                                   kernel.y_factors[c][ky];
    }
    return kernel;
}

// All per-channel kernels laid out as a single 2D array of
// theta_bins x theta_bins spatial blocks of k_x x k_y. Column block c holds
// channel c's kernel; its theta slice at offset d sits in row block
// (c + d) mod theta_bins, so the theta axis wraps from the last row block to
// the first instead of running off the edge.
struct StackedKernel {
    int theta_bins = 0;
    int k_theta = 0;
    int k_x = 0;
    int k_y = 0;
    std::vector<double> values;  // [theta_bins*k_x][theta_bins*k_y] row-major

    int rows() const { return theta_bins * k_x; }
    int cols() const { return theta_bins * k_y; }
    double& at(int r, int c) {
        return values[static_cast<std::size_t>(r) * cols() + c];
    }
    const double& at(int r, int c) const {
        return values[static_cast<std::size_t>(r) * cols() + c];
    }
};

inline StackedKernel stack_kernel(const OdometryKernel& kernel,
                                  int theta_bins) {
    if (theta_bins != kernel.theta_bins)
        throw data_error("stack_kernel: kernel has " +
                         std::to_string(kernel.theta_bins) +
                         " channels, expected " + std::to_string(theta_bins));
    if (kernel.spec.k_theta > theta_bins)
        throw data_error("stack_kernel: k_theta exceeds theta_bins; circular "
                         "placement would overlap");
    StackedKernel stacked;
    stacked.theta_bins = theta_bins;
    stacked.k_theta = kernel.spec.k_theta;
    stacked.k_x = kernel.spec.k_x;
    stacked.k_y = kernel.spec.k_y;
    stacked.values.assign(
        static_cast<std::size_t>(stacked.rows()) * stacked.cols(), 0.0);
    const int half_t = kernel.spec.half_theta();
    for (int c = 0; c < theta_bins; ++c) {
        for (int dt = -half_t; dt <= half_t; ++dt) {
            int rb = (c + dt) % theta_bins;
            if (rb < 0) rb += theta_bins;
            for (int kx = 0; kx < stacked.k_x; ++kx)
                for (int ky = 0; ky < stacked.k_y; ++ky)
                    stacked.at(rb * stacked.k_x + kx, c * stacked.k_y + ky) =
                        kernel.kernel_value(c, dt + half_t, kx, ky);
        }
    }
    return stacked;
}

// Recover the dense per-channel kernels from the stacked layout.
inline std::vector<std::vector<double>> unstack_kernel(
    const StackedKernel& stacked) {
    if (stacked.k_theta > stacked.theta_bins)
        throw data_error("unstack_kernel: k_theta exceeds theta_bins");
    std::vector<std::vector<double>> per_channel(stacked.theta_bins);
    const int half_t = (stacked.k_theta - 1) / 2;
    for (int c = 0; c < stacked.theta_bins; ++c) {
        per_channel[c].resize(static_cast<std::size_t>(stacked.k_theta) *
                              stacked.k_x * stacked.k_y);
        std::size_t idx = 0;
        for (int dt = -half_t; dt <= half_t; ++dt) {
            int rb = (c + dt) % stacked.theta_bins;
            if (rb < 0) rb += stacked.theta_bins;
            for (int kx = 0; kx < stacked.k_x; ++kx)
                for (int ky = 0; ky < stacked.k_y; ++ky)
                    per_channel[c][idx++] =
                        stacked.at(rb * stacked.k_x + kx, c * stacked.k_y + ky);
        }
    }
    return per_channel;
}

namespace detail {

// out[x][y] = sum_{dx,dy} in[x-dx][y-dy] * gx[half+dx] * gy[half+dy], with
// mass crossing the XY borders truncated. tmp must hold x_bins*y_bins.
inline void convolve_xy(const double* in, double* tmp, double* out, int x_bins,
                        int y_bins, const std::vector<double>& gx,
                        const std::vector<double>& gy) {
    const int hx = (static_cast<int>(gx.size()) - 1) / 2;
    const int hy = (static_cast<int>(gy.size()) - 1) / 2;
    const std::size_t plane = static_cast<std::size_t>(x_bins) * y_bins;
    std::fill(tmp, tmp + plane, 0.0);
    for (int x = 0; x < x_bins; ++x) {
        const double* src = in + static_cast<std::size_t>(x) * y_bins;
        double* dst = tmp + static_cast<std::size_t>(x) * y_bins;
        for (int dy = -hy; dy <= hy; ++dy) {
            const double w = gy[hy + dy];
            if (w == 0.0) continue;
            const int y0 = std::max(0, dy);
            const int y1 = y_bins + std::min(0, dy);
            for (int y = y0; y < y1; ++y) dst[y] += src[y - dy] * w;
        }
    }
    std::fill(out, out + plane, 0.0);
    for (int dx = -hx; dx <= hx; ++dx) {
        const double w = gx[hx + dx];
        if (w == 0.0) continue;
        const int x0 = std::max(0, dx);
        const int x1 = x_bins + std::min(0, dx);
        for (int x = x0; x < x1; ++x) {
            const double* src = tmp + static_cast<std::size_t>(x - dx) * y_bins;
            double* dst = out + static_cast<std::size_t>(x) * y_bins;
            for (int y = 0; y < y_bins; ++y) dst[y] += src[y] * w;
        }
    }
}

}  // namespace detail

// Convolve the belief with the per-channel kernels: mass at (t, x, y) moves
// to (t + dt mod theta_bins, x + dx, y + dy) weighted by channel t's kernel.
// Theta wraps circularly; XY mass pushed past the borders is truncated and
// the result is renormalized. prenorm_mass, when given, receives the mass
// retained before renormalization. The separable kernel lets the spatial and
// theta passes run independently, which keeps the cost linear in the tap
// counts instead of their product.
inline LikelihoodVolume propagate(const LikelihoodVolume& vol,
                                  const OdometryKernel& kernel,
                                  int n_threads = 1,
                                  double* prenorm_mass = nullptr) {
    const GridSpec& spec = vol.spec;
    if (kernel.theta_bins != spec.theta_bins)
        throw data_error("propagate: kernel has " +
                         std::to_string(kernel.theta_bins) +
                         " channels but the volume has " +
                         std::to_string(spec.theta_bins));
    if (kernel.spec.k_theta > spec.theta_bins ||
        kernel.spec.k_x > spec.x_bins || kernel.spec.k_y > spec.y_bins)
        throw data_error("propagate: kernel extents exceed volume extents");
    if (n_threads < 1)
        throw config_error("propagate: n_threads must be >= 1");

    const int t_bins = spec.theta_bins;
    const std::size_t plane = vol.plane_size();

    std::vector<double> spatial(vol.values.size());
    parallel_for(0, t_bins, n_threads, [&](int b, int e) {
        std::vector<double> tmp(plane);
        for (int c = b; c < e; ++c)
            detail::convolve_xy(vol.values.data() + c * plane, tmp.data(),
                                spatial.data() + c * plane, spec.x_bins,
                                spec.y_bins, kernel.x_factors[c],
                                kernel.y_factors[c]);
    });

    LikelihoodVolume out{spec, std::vector<double>(vol.values.size())};
    const int half_t = kernel.spec.half_theta();
    parallel_for(0, t_bins, n_threads, [&](int b, int e) {
        for (int to = b; to < e; ++to) {
            double* dst = out.values.data() + to * plane;
            for (int dt = -half_t; dt <= half_t; ++dt) {
                int src = (to - dt) % t_bins;
                if (src < 0) src += t_bins;
                const double w = kernel.theta_factors[src][half_t + dt];
                if (w == 0.0) continue;
                const double* s = spatial.data() + src * plane;
                for (std::size_t i = 0; i < plane; ++i) dst[i] += s[i] * w;
            }
        }
    });

    const double total = total_mass(out);
    if (prenorm_mass) *prenorm_mass = total;
    if (!(total > 0.0) || !std::isfinite(total))
        throw data_error("propagate: all probability mass left the grid");
    const double inv = 1.0 / total;
    for (double& v : out.values) v *= inv;
    return out;
}

// Same contract as propagate, written as a direct scatter of every cell's
// mass through an explicitly evaluated (non-separable) Gaussian block. Slow;
// exists to cross-check the fast path.
inline LikelihoodVolume propagate_reference(
    const LikelihoodVolume& vol, const std::vector<IntegerShift>& shifts,
    const std::vector<AxisSigmas>& sigmas, const KernelSpec& kspec) {
    kspec.validate();
    const GridSpec& spec = vol.spec;
    if (shifts.size() != static_cast<std::size_t>(spec.theta_bins) ||
        sigmas.size() != shifts.size())
        throw data_error("propagate_reference: need one shift and sigma "
                         "triple per theta channel");
    if (kspec.k_theta > spec.theta_bins || kspec.k_x > spec.x_bins ||
        kspec.k_y > spec.y_bins)
        throw data_error("propagate_reference: kernel extents exceed volume "
                         "extents");
    const int ht = kspec.half_theta(), hx = kspec.half_x(), hy = kspec.half_y();
    const int t_bins = spec.theta_bins;

    LikelihoodVolume out{spec, std::vector<double>(vol.values.size(), 0.0)};
    std::vector<double> block(static_cast<std::size_t>(kspec.k_theta) *
                              kspec.k_x * kspec.k_y);
    for (int c = 0; c < t_bins; ++c) {
        if (std::llabs(shifts[c].i_theta) > ht)
            throw kernel_overflow(c, 't', shifts[c].i_theta, ht);
        if (std::llabs(shifts[c].i_x) > hx)
            throw kernel_overflow(c, 'x', shifts[c].i_x, hx);
        if (std::llabs(shifts[c].i_y) > hy)
            throw kernel_overflow(c, 'y', shifts[c].i_y, hy);
        const double st = std::max(sigmas[c].theta, kspec.sigma_floor);
        const double sx = std::max(sigmas[c].x, kspec.sigma_floor);
        const double sy = std::max(sigmas[c].y, kspec.sigma_floor);
        double sum = 0.0;
        std::size_t idx = 0;
        for (int dt = -ht; dt <= ht; ++dt) {
            const double zt = (dt - shifts[c].i_theta) / st;
            for (int dx = -hx; dx <= hx; ++dx) {
                const double zx = (dx - shifts[c].i_x) / sx;
                for (int dy = -hy; dy <= hy; ++dy) {
                    const double zy = (dy - shifts[c].i_y) / sy;
                    block[idx] = std::exp(-0.5 * (zt * zt + zx * zx + zy * zy));
                    sum += block[idx];
                    ++idx;
                }
            }
        }
        for (double& b : block) b /= sum;

        for (int x = 0; x < spec.x_bins; ++x) {
            for (int y = 0; y < spec.y_bins; ++y) {
                const double v = vol.at(c, x, y);
                if (v == 0.0) continue;
                idx = 0;
                for (int dt = -ht; dt <= ht; ++dt) {
                    int td = (c + dt) % t_bins;
                    if (td < 0) td += t_bins;
                    for (int dx = -hx; dx <= hx; ++dx) {
                        const int xd = x + dx;
                        if (xd < 0 || xd >= spec.x_bins) {
                            idx += kspec.k_y;
                            continue;
                        }
                        for (int dy = -hy; dy <= hy; ++dy, ++idx) {
                            const int yd = y + dy;
                            if (yd < 0 || yd >= spec.y_bins) continue;
                            out.at(td, xd, yd) += v * block[idx];
                        }
                    }
                }
            }
        }
    }

    const double total = total_mass(out);
    if (!(total > 0.0) || !std::isfinite(total))
        throw data_error("propagate_reference: all probability mass left the "
                         "grid");
    const double inv = 1.0 / total;
    for (double& v : out.values) v *= inv;
    return out;
}

// Per-axis kernel stds implied by one odometry step. The translational
// uncertainty is split into components along and across the direction of
// travel and projected onto each channel's grid axes; everything is floored
// by the kernel spec so the kernel never collapses below cell size.
inline std::vector<AxisSigmas> sigmas_from_motion(const RotTransRot& m,
                                                  const NoiseParams& noise,
                                                  const GridSpec& spec,
                                                  const KernelSpec& kspec) {
    noise.validate();
    spec.validate();
    kspec.validate();
    const double r1_sq = m.d_theta1 * m.d_theta1;
    const double r2_sq = m.d_theta2 * m.d_theta2;
    const double x_sq = m.d_x * m.d_x;
    const double sigma_rot = std::sqrt(noise.a1 * (r1_sq + r2_sq) + noise.a2 * x_sq);
    const double sigma_along = std::sqrt(noise.a3 * x_sq + noise.a4 * (r1_sq + r2_sq));
    // heading error before translating sweeps the endpoint sideways
    const double sigma_across =
        std::abs(m.d_x) * std::sqrt(noise.a1 * r1_sq + noise.a2 * x_sq);
    const double d_theta_cells = (m.d_theta1 + m.d_theta2) / spec.res_theta;
    const double sigma_theta =
        std::max(kspec.sigma_floor,
                 sigma_rot / spec.res_theta +
                     kspec.sigma_scale_theta * std::abs(d_theta_cells));

    std::vector<AxisSigmas> out(spec.theta_bins);
    const double along_sq = sigma_along * sigma_along;
    const double across_sq = sigma_across * sigma_across;
    for (int c = 0; c < spec.theta_bins; ++c) {
        const double phi = c * spec.res_theta + m.d_theta1;
        const double cp = std::cos(phi), sp = std::sin(phi);
        const double shift_x = m.d_x * cp / spec.res_x;
        const double shift_y = m.d_x * sp / spec.res_y;
        out[c].theta = sigma_theta;
        out[c].x = std::max(
            kspec.sigma_floor,
            std::sqrt(along_sq * cp * cp + across_sq * sp * sp) / spec.res_x +
                kspec.sigma_scale_x * std::abs(shift_x));
        out[c].y = std::max(
            kspec.sigma_floor,
            std::sqrt(along_sq * sp * sp + across_sq * cp * cp) / spec.res_y +
                kspec.sigma_scale_y * std::abs(shift_y));
    }
    return out;
}

}  // namespace gridloc
