#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "gridloc/errors.hpp"
#include "gridloc/pose.hpp"

namespace gridloc {

// Ground truth and estimate aligned index by index.
struct TrajectoryRecord {
    std::vector<Pose2D> gt;
    std::vector<Pose2D> est;
};

struct MetricsTable {
    double rmse_m = 0.0;
    double mean_m = 0.0;
    double median_m = 0.0;
    double std_m = 0.0;
    double heading_rmse_rad = 0.0;
};

// Per-step translational error statistics, with no alignment between the
// trajectories. std is the population standard deviation, so
// rmse^2 == mean^2 + std^2. Heading error is tracked separately.
inline MetricsTable ate(const TrajectoryRecord& rec) {
    if (rec.gt.size() != rec.est.size())
        throw data_error("ate: ground truth has " +
                         std::to_string(rec.gt.size()) +
                         " poses but the estimate has " +
                         std::to_string(rec.est.size()));
    if (rec.gt.empty()) throw data_error("ate: empty trajectory");

    std::vector<double> errors(rec.gt.size());
    double sum = 0.0, sum_sq = 0.0, heading_sq = 0.0;
    for (std::size_t i = 0; i < rec.gt.size(); ++i) {
        const double e = std::hypot(rec.est[i].x - rec.gt[i].x,
                                    rec.est[i].y - rec.gt[i].y);
        errors[i] = e;
        sum += e;
        sum_sq += e * e;
        const double he = angle_diff(rec.est[i].theta(), rec.gt[i].theta());
        heading_sq += he * he;
    }
    const double n = static_cast<double>(errors.size());
    std::sort(errors.begin(), errors.end());
    const std::size_t mid = errors.size() / 2;
    const double median = errors.size() % 2 == 1
                              ? errors[mid]
                              : 0.5 * (errors[mid - 1] + errors[mid]);
    MetricsTable m;
    m.mean_m = sum / n;
    m.median_m = median;
    m.rmse_m = std::sqrt(sum_sq / n);
    m.std_m = std::sqrt(std::max(0.0, sum_sq / n - m.mean_m * m.mean_m));
    m.heading_rmse_rad = std::sqrt(heading_sq / n);
    return m;
}

// Named metric rows ranked by rmse ascending; ties keep the input order.
struct RunComparison {
    struct Entry {
        std::string name;
        MetricsTable metrics;
    };
    std::vector<Entry> ranked;

    std::string to_csv() const {
        std::string out = "method,rmse_m,mean_m,median_m,std_m,heading_rmse_rad\n";
        char buf[160];
        for (const Entry& e : ranked) {
            std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                          e.name.c_str(), e.metrics.rmse_m, e.metrics.mean_m,
                          e.metrics.median_m, e.metrics.std_m,
                          e.metrics.heading_rmse_rad);
            out += buf;
        }
        return out;
    }
};

inline RunComparison compare_runs(
    const std::vector<std::pair<std::string, TrajectoryRecord>>& records) {
    if (records.empty()) throw data_error("compare_runs: no records");
    const std::vector<Pose2D>& gt0 = records.front().second.gt;
    for (const auto& [name, rec] : records) {
        if (rec.gt.size() != gt0.size())
            throw data_error("compare_runs: '" + name +
                             "' covers a different ground truth");
        for (std::size_t i = 0; i < gt0.size(); ++i) {
            const bool same = rec.gt[i].x == gt0[i].x &&
                              rec.gt[i].y == gt0[i].y &&
                              rec.gt[i].theta() == gt0[i].theta();
            if (!same)
                throw data_error("compare_runs: '" + name +
                                 "' covers a different ground truth");
        }
    }
    RunComparison cmp;
    for (const auto& [name, rec] : records)
        cmp.ranked.push_back({name, ate(rec)});
    std::stable_sort(cmp.ranked.begin(), cmp.ranked.end(),
                     [](const RunComparison::Entry& a,
                        const RunComparison::Entry& b) {
                         return a.metrics.rmse_m < b.metrics.rmse_m;
                     });
    return cmp;
}

}  // namespace gridloc
