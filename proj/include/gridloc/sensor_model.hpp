#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gridloc/errors.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/heatmap.hpp"
#include "gridloc/pose.hpp"

namespace gridloc {

// Discretisation of likelihood values into classification bands.
struct BandSpec {
    int n_bands = 10;
    int top_n = 3;  // bands summed when decoding

    void validate() const {
        if (n_bands < 2) throw config_error("bands: n_bands must be >= 2");
        if (top_n < 1 || top_n >= n_bands)
            throw config_error("bands: top_n must be in [1, n_bands)");
    }
};

// Per-band scores over the XY plane, layout [band][x][y] row-major.
struct BandVolume {
    int n_bands = 0;
    int x_bins = 0;
    int y_bins = 0;
    std::vector<float> values;

    BandVolume() = default;
    BandVolume(int bands, int xs, int ys)
        : n_bands(bands), x_bins(xs), y_bins(ys),
          values(static_cast<std::size_t>(bands) * xs * ys, 0.0f) {}

    std::size_t linear_index(int b, int ix, int iy) const {
        return (static_cast<std::size_t>(b) * x_bins + ix) * y_bins + iy;
    }
    float& at(int b, int ix, int iy) { return values[linear_index(b, ix, iy)]; }
    const float& at(int b, int ix, int iy) const {
        return values[linear_index(b, ix, iy)];
    }
};

// One-hot band classification of a [0, 1] likelihood map: band
// min(n_bands - 1, floor(p * n_bands)). Values slightly above 1 clamp into
// the top band.
inline BandVolume encode_bands(const Heatmap& h, const BandSpec& spec) {
    spec.validate();
    BandVolume bv(spec.n_bands, h.x_bins, h.y_bins);
    const std::size_t plane = h.values.size();
    for (std::size_t i = 0; i < plane; ++i) {
        const float p = h.values[i];
        if (p < 0.0f)
            throw data_error("encode_bands: likelihoods must be >= 0");
        const int band = std::min(
            spec.n_bands - 1,
            static_cast<int>(std::floor(static_cast<double>(p) * spec.n_bands)));
        bv.values[static_cast<std::size_t>(band) * plane + i] = 1.0f;
    }
    return bv;
}

// Per-cell softmax over the band scores, then the summed mass of the top_n
// highest bands. Recovers a [0, 1] likelihood from band classifications.
inline Heatmap decode_bands(const BandVolume& bv, const BandSpec& spec) {
    spec.validate();
    if (bv.n_bands != spec.n_bands)
        throw data_error("decode_bands: volume has " +
                         std::to_string(bv.n_bands) + " bands, expected " +
                         std::to_string(spec.n_bands));
    Heatmap out(bv.x_bins, bv.y_bins);
    const std::size_t plane = out.values.size();
    const int first_top = spec.n_bands - spec.top_n;
    for (std::size_t i = 0; i < plane; ++i) {
        double peak = -1e300;
        for (int b = 0; b < spec.n_bands; ++b)
            peak = std::max(peak,
                            static_cast<double>(bv.values[b * plane + i]));
        double den = 0.0, num = 0.0;
        for (int b = 0; b < spec.n_bands; ++b) {
            const double e =
                std::exp(static_cast<double>(bv.values[b * plane + i]) - peak);
            den += e;
            if (b >= first_top) num += e;
        }
        out.values[i] = static_cast<float>(num / den);
    }
    return out;
}

// Synthetic stand-in for a learned observation model: a Gaussian mode at the
// true pose plus optional distractor modes, a uniform floor, and random
// whole-frame dropouts.
struct Distractor {
    double x = 0.0;       // offset from the true pose when relative,
    double y = 0.0;       // otherwise an absolute map position
    double weight = 0.0;
    bool relative = true;
};

struct OracleParams {
    double sigma_obs = 1.0;  // metres
    double floor = 0.0;
    double dropout_prob = 0.0;
    std::vector<Distractor> distractors;

    void validate() const {
        if (!(sigma_obs > 0.0))
            throw config_error("oracle: sigma_obs must be > 0");
        if (floor < 0.0) throw config_error("oracle: floor must be >= 0");
        if (dropout_prob < 0.0 || dropout_prob > 1.0)
            throw config_error("oracle: dropout_prob must be in [0, 1]");
        for (const Distractor& d : distractors)
            if (d.weight < 0.0)
                throw config_error("oracle: distractor weights must be >= 0");
    }
};

inline Heatmap oracle_observe(const Pose2D& true_pose, const GridSpec& spec,
                              const OracleParams& params,
                              std::mt19937_64& rng) {
    params.validate();
    spec.validate();
    if (!in_bounds(spec, true_pose))
        throw out_of_bounds("oracle_observe: true pose (" +
                            std::to_string(true_pose.x) + ", " +
                            std::to_string(true_pose.y) +
                            ") is outside the grid");
    Heatmap h(spec.x_bins, spec.y_bins);
    std::fill(h.values.begin(), h.values.end(),
              static_cast<float>(params.floor));
    // the dropout draw happens before the early-out so the stream of random
    // numbers per frame stays fixed
    const double roll =
        std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (roll < params.dropout_prob) return h;

    const double inv_two_var = 0.5 / (params.sigma_obs * params.sigma_obs);
    std::vector<double> col(spec.x_bins), row(spec.y_bins);
    auto add_mode = [&](double cx, double cy, double weight) {
        if (weight <= 0.0) return;
        for (int ix = 0; ix < spec.x_bins; ++ix) {
            const double d = spec.x_centre(ix) - cx;
            col[ix] = std::exp(-d * d * inv_two_var);
        }
        for (int iy = 0; iy < spec.y_bins; ++iy) {
            const double d = spec.y_centre(iy) - cy;
            row[iy] = std::exp(-d * d * inv_two_var);
        }
        for (int ix = 0; ix < spec.x_bins; ++ix) {
            if (col[ix] == 0.0) continue;
            const double wc = weight * col[ix];
            float* dst = h.values.data() + h.linear_index(ix, 0);
            for (int iy = 0; iy < spec.y_bins; ++iy)
                dst[iy] += static_cast<float>(wc * row[iy]);
        }
    };
    add_mode(true_pose.x, true_pose.y, 1.0);
    for (const Distractor& d : params.distractors) {
        if (d.relative)
            add_mode(true_pose.x + d.x, true_pose.y + d.y, d.weight);
        else
            add_mode(d.x, d.y, d.weight);
    }
    return h;
}

inline Heatmap oracle_observe(const Pose2D& true_pose, const GridSpec& spec,
                              const OracleParams& params, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return oracle_observe(true_pose, spec, params, rng);
}

}  // namespace gridloc
