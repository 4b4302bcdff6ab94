#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridloc/conv_odometry.hpp"
#include "gridloc/errors.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/heatmap.hpp"
#include "gridloc/likelihood_volume.hpp"
#include "gridloc/motion_model.hpp"
#include "gridloc/sensor_model.hpp"

namespace gridloc {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; byte swapping is not "
              "implemented");

inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

// More elements than this is assumed to be a corrupt header, not real data.
inline constexpr std::uint64_t kMaxElements = 1ull << 28;

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n,
                       const std::string& path) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw truncated_payload(path + ": file ends before its payload does");
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
    write_bytes(os, &v, sizeof(v));
}

inline std::uint32_t read_u32(std::istream& is, const std::string& path) {
    std::uint32_t v = 0;
    read_bytes(is, &v, sizeof(v), path);
    return v;
}

inline void write_f64(std::ostream& os, double v) {
    write_bytes(os, &v, sizeof(v));
}

inline double read_f64(std::istream& is, const std::string& path) {
    double v = 0.0;
    read_bytes(is, &v, sizeof(v), path);
    return v;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw data_error(path + ": cannot open for writing");
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error(path + ": cannot open for reading");
    return is;
}

inline void expect_header(std::istream& is, const char magic[4],
                          const std::string& path) {
    char got[4] = {};
    read_bytes(is, got, 4, path);
    if (std::memcmp(got, magic, 4) != 0)
        throw format_mismatch(path + ": expected magic '" +
                              std::string(magic, 4) + "', got '" +
                              std::string(got, 4) + "'");
    const std::uint32_t version = read_u32(is, path);
    if (version != kFormatVersion)
        throw format_mismatch(path + ": unsupported version " +
                              std::to_string(version));
}

inline std::uint32_t checked_dim(std::uint32_t v, const std::string& path) {
    if (v == 0 || v > kMaxElements)
        throw dimension_overflow(path + ": dimension " + std::to_string(v) +
                                 " is outside the supported range");
    return v;
}

inline void check_total(std::uint64_t total, const std::string& path) {
    if (total == 0 || total > kMaxElements)
        throw dimension_overflow(path + ": payload of " +
                                 std::to_string(total) +
                                 " elements is outside the supported range");
}

inline void write_f32_block(std::ostream& os, const float* data,
                            std::size_t n) {
    write_bytes(os, data, n * sizeof(float));
}

inline std::vector<float> read_f32_block(std::istream& is, std::size_t n,
                                         const std::string& path) {
    std::vector<float> data(n);
    read_bytes(is, data.data(), n * sizeof(float), path);
    return data;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// ---- likelihood volumes ('LVOL'): values stored as f32 ----

inline void save_volume(const std::string& path, const LikelihoodVolume& vol) {
    auto os = detail::open_out(path);
    detail::write_bytes(os, "LVOL", 4);
    detail::write_u32(os, kFormatVersion);
    detail::write_u32(os, static_cast<std::uint32_t>(vol.spec.theta_bins));
    detail::write_u32(os, static_cast<std::uint32_t>(vol.spec.x_bins));
    detail::write_u32(os, static_cast<std::uint32_t>(vol.spec.y_bins));
    detail::write_f64(os, vol.spec.res_x);
    detail::write_f64(os, vol.spec.res_y);
    detail::write_f64(os, vol.spec.res_theta);
    detail::write_f64(os, vol.spec.origin_x);
    detail::write_f64(os, vol.spec.origin_y);
    std::vector<float> data(vol.values.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = static_cast<float>(vol.values[i]);
    detail::write_f32_block(os, data.data(), data.size());
    if (!os) throw data_error(path + ": write failed");
}

inline LikelihoodVolume load_volume(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_header(is, "LVOL", path);
    GridSpec spec;
    spec.theta_bins = static_cast<int>(detail::checked_dim(detail::read_u32(is, path), path));
    spec.x_bins = static_cast<int>(detail::checked_dim(detail::read_u32(is, path), path));
    spec.y_bins = static_cast<int>(detail::checked_dim(detail::read_u32(is, path), path));
    detail::check_total(static_cast<std::uint64_t>(spec.theta_bins) *
                            spec.x_bins * spec.y_bins,
                        path);
    spec.res_x = detail::read_f64(is, path);
    spec.res_y = detail::read_f64(is, path);
    spec.res_theta = detail::read_f64(is, path);
    spec.origin_x = detail::read_f64(is, path);
    spec.origin_y = detail::read_f64(is, path);
    try {
        spec.validate();
    } catch (const config_error& e) {
        throw data_error(path + ": inconsistent grid header (" +
                         std::string(e.what()) + ")");
    }
    const auto data = detail::read_f32_block(is, spec.cell_count(), path);
    LikelihoodVolume vol{spec, std::vector<double>(data.size())};
    for (std::size_t i = 0; i < data.size(); ++i)
        vol.values[i] = static_cast<double>(data[i]);
    return vol;
}

// ---- heatmaps ('HMAP') ----

inline void save_heatmap(const std::string& path, const Heatmap& h) {
    auto os = detail::open_out(path);
    detail::write_bytes(os, "HMAP", 4);
    detail::write_u32(os, kFormatVersion);
    detail::write_u32(os, static_cast<std::uint32_t>(h.x_bins));
    detail::write_u32(os, static_cast<std::uint32_t>(h.y_bins));
    detail::write_f32_block(os, h.values.data(), h.values.size());
    if (!os) throw data_error(path + ": write failed");
}

inline Heatmap load_heatmap(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_header(is, "HMAP", path);
    const auto xs = detail::checked_dim(detail::read_u32(is, path), path);
    const auto ys = detail::checked_dim(detail::read_u32(is, path), path);
    detail::check_total(static_cast<std::uint64_t>(xs) * ys, path);
    Heatmap h(static_cast<int>(xs), static_cast<int>(ys));
    h.values = detail::read_f32_block(is, h.values.size(), path);
    return h;
}

// ---- band volumes ('BVOL') ----

inline void save_band_volume(const std::string& path, const BandVolume& bv) {
    auto os = detail::open_out(path);
    detail::write_bytes(os, "BVOL", 4);
    detail::write_u32(os, kFormatVersion);
    detail::write_u32(os, static_cast<std::uint32_t>(bv.n_bands));
    detail::write_u32(os, static_cast<std::uint32_t>(bv.x_bins));
    detail::write_u32(os, static_cast<std::uint32_t>(bv.y_bins));
    detail::write_f32_block(os, bv.values.data(), bv.values.size());
    if (!os) throw data_error(path + ": write failed");
}

inline BandVolume load_band_volume(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_header(is, "BVOL", path);
    const auto bands = detail::checked_dim(detail::read_u32(is, path), path);
    const auto xs = detail::checked_dim(detail::read_u32(is, path), path);
    const auto ys = detail::checked_dim(detail::read_u32(is, path), path);
    detail::check_total(static_cast<std::uint64_t>(bands) * xs * ys, path);
    BandVolume bv(static_cast<int>(bands), static_cast<int>(xs),
                  static_cast<int>(ys));
    bv.values = detail::read_f32_block(is, bv.values.size(), path);
    return bv;
}

// ---- stacked kernels ('KSTK') ----

inline void save_stacked_kernel(const std::string& path,
                                const StackedKernel& k) {
    auto os = detail::open_out(path);
    detail::write_bytes(os, "KSTK", 4);
    detail::write_u32(os, kFormatVersion);
    detail::write_u32(os, static_cast<std::uint32_t>(k.rows()));
    detail::write_u32(os, static_cast<std::uint32_t>(k.cols()));
    std::vector<float> data(k.values.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = static_cast<float>(k.values[i]);
    detail::write_f32_block(os, data.data(), data.size());
    if (!os) throw data_error(path + ": write failed");
}

// ---- PGM (P5) export, peak-scaled to 255 ----

namespace detail {

inline void write_pgm_raster(const std::string& path, int height, int width,
                             const double* values) {
    auto os = open_out(path);
    os << "P5\n" << width << " " << height << "\n255\n";
    double peak = 0.0;
    const std::size_t n = static_cast<std::size_t>(height) * width;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, values[i]);
    std::vector<unsigned char> raster(n, 0);
    if (peak > 0.0)
        for (std::size_t i = 0; i < n; ++i)
            raster[i] = static_cast<unsigned char>(
                std::lround(values[i] / peak * 255.0));
    write_bytes(os, raster.data(), raster.size());
    if (!os) throw data_error(path + ": write failed");
}

}  // namespace detail

inline void write_pgm(const std::string& path, const StackedKernel& k) {
    detail::write_pgm_raster(path, k.rows(), k.cols(), k.values.data());
}

// Image rows run along the x axis of the map.
inline void write_pgm(const std::string& path, const Heatmap& h) {
    std::vector<double> values(h.values.begin(), h.values.end());
    detail::write_pgm_raster(path, h.x_bins, h.y_bins, values.data());
}

// ---- CSV trajectories and odometry ----

struct TimedPose {
    int t = 0;
    Pose2D pose;
};

struct TimedMotion {
    int t = 0;
    RotTransRot motion;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline double parse_field(const std::string& field, const std::string& path,
                          int line_no) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0')
        throw data_error(path + ":" + std::to_string(line_no) +
                         ": cannot parse '" + field + "' as a number");
    return v;
}

template <typename Row>
std::vector<Row> read_csv(const std::string& path, const std::string& header,
                          Row (*make)(const std::vector<std::string>&,
                                      const std::string&, int)) {
    std::ifstream is(path);
    if (!is) throw data_error(path + ": cannot open for reading");
    std::string line;
    if (!std::getline(is, line))
        throw data_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw data_error(path + ": expected header '" + header + "', got '" +
                         line + "'");
    std::vector<Row> rows;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(make(split_csv_line(line), path, line_no));
    }
    return rows;
}

}  // namespace detail

inline void write_trajectory_csv(const std::string& path,
                                 const std::vector<TimedPose>& rows) {
    auto os = detail::open_out(path);
    os << "t,x,y,theta\n";
    for (const TimedPose& r : rows)
        os << r.t << ',' << detail::format_double(r.pose.x) << ','
           << detail::format_double(r.pose.y) << ','
           << detail::format_double(r.pose.theta()) << '\n';
    if (!os) throw data_error(path + ": write failed");
}

inline std::vector<TimedPose> read_trajectory_csv(const std::string& path) {
    return detail::read_csv<TimedPose>(
        path, "t,x,y,theta",
        [](const std::vector<std::string>& f, const std::string& p,
           int line_no) {
            if (f.size() != 4)
                throw data_error(p + ":" + std::to_string(line_no) +
                                 ": expected 4 fields, got " +
                                 std::to_string(f.size()));
            TimedPose row;
            row.t = static_cast<int>(detail::parse_field(f[0], p, line_no));
            row.pose = Pose2D(detail::parse_field(f[1], p, line_no),
                              detail::parse_field(f[2], p, line_no),
                              detail::parse_field(f[3], p, line_no));
            return row;
        });
}

inline void write_odometry_csv(const std::string& path,
                               const std::vector<TimedMotion>& rows) {
    auto os = detail::open_out(path);
    os << "t,dtheta1,dx,dtheta2\n";
    for (const TimedMotion& r : rows)
        os << r.t << ',' << detail::format_double(r.motion.d_theta1) << ','
           << detail::format_double(r.motion.d_x) << ','
           << detail::format_double(r.motion.d_theta2) << '\n';
    if (!os) throw data_error(path + ": write failed");
}

inline std::vector<TimedMotion> read_odometry_csv(const std::string& path) {
    return detail::read_csv<TimedMotion>(
        path, "t,dtheta1,dx,dtheta2",
        [](const std::vector<std::string>& f, const std::string& p,
           int line_no) {
            if (f.size() != 4)
                throw data_error(p + ":" + std::to_string(line_no) +
                                 ": expected 4 fields, got " +
                                 std::to_string(f.size()));
            TimedMotion row;
            row.t = static_cast<int>(detail::parse_field(f[0], p, line_no));
            row.motion = RotTransRot(detail::parse_field(f[1], p, line_no),
                                     detail::parse_field(f[2], p, line_no),
                                     detail::parse_field(f[3], p, line_no));
            return row;
        });
}

}  // namespace gridloc
