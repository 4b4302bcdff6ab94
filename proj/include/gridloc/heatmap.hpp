#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace gridloc {

// Nonnegative XY observation likelihood, layout [x][y] row-major.
struct Heatmap {
    int x_bins = 0;
    int y_bins = 0;
    std::vector<float> values;

    Heatmap() = default;
    Heatmap(int xs, int ys)
        : x_bins(xs), y_bins(ys),
          values(static_cast<std::size_t>(xs) * ys, 0.0f) {}

    std::size_t linear_index(int ix, int iy) const {
        return static_cast<std::size_t>(ix) * y_bins + iy;
    }
    float& at(int ix, int iy) { return values[linear_index(ix, iy)]; }
    const float& at(int ix, int iy) const { return values[linear_index(ix, iy)]; }
};

// Scale so the peak value is 1. An all-zero map is left untouched.
inline void peak_normalize(Heatmap& h) {
    const auto it = std::max_element(h.values.begin(), h.values.end());
    if (it == h.values.end() || *it <= 0.0f) return;
    const float peak = *it;
    for (float& v : h.values) v /= peak;
}

}  // namespace gridloc
