#pragma once

// Deterministic synthetic scenes for tests: textured clear images, range ramps and
// water conditions with known parameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "uwimf/formation.hpp"
#include "uwimf/image.hpp"
#include "uwimf/metrics.hpp"
#include "uwimf/rng.hpp"

namespace uwimf::testing {

struct SceneOptions {
    int width = 64;
    int height = 64;
    double z_near = 0.5;
    double z_far = 10.0;
    double shadow_fraction = 0.03;  ///< pixels forced to black, spread evenly over rows
    double freq_lo = 0.8;           ///< texture angular frequency range (rad / pixel)
    double freq_hi = 1.6;
    int gray_patches = 0;           ///< 6x6 neutral patches placed on a grid
    int patch_size = 6;
};

struct Scene {
    LinearImage clear;
    RangeMap z;
    PatchMask patches;
};

inline LinearImage random_image(int w, int h, DeterministicRng& rng, double lo = 0.0, double hi = 1.0) {
    LinearImage img(w, h);
    for (double& v : img.data()) v = rng.uniform(lo, hi);
    return img;
}

inline RangeMap random_range(int w, int h, DeterministicRng& rng, double lo, double hi) {
    RangeMap z(w, h);
    for (double& v : z.data()) v = rng.uniform(lo, hi);
    return z;
}

/// Smooth range ramp from z_near (top) to z_far (bottom) with a gentle horizontal tilt
/// and a low-frequency bump.
inline RangeMap ramp_range(int w, int h, double z_near, double z_far, DeterministicRng& rng) {
    RangeMap z(w, h);
    const double tilt = rng.uniform(-0.1, 0.1);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double u = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
            const double v = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
            double t = 0.9 * u + tilt * (v - 0.5) + 0.03 * std::sin(2.0 * std::numbers::pi * v + phase);
            t = std::clamp(t, 0.0, 1.0);
            z(x, y) = z_near + (z_far - z_near) * t;
        }
    }
    return z;
}

/// Textured, color-balanced clear image: mean near 0.5 in every channel, sinusoidal
/// texture with per-channel phase, per-pixel noise, black shadow pixels and optional
/// neutral gray patches.
inline Scene textured_scene(const SceneOptions& o, std::uint64_t seed) {
    DeterministicRng rng(seed);
    Scene s;
    s.z = ramp_range(o.width, o.height, o.z_near, o.z_far, rng);
    s.clear = LinearImage(o.width, o.height);
    const double fx = rng.uniform(o.freq_lo, o.freq_hi);
    const double fy = rng.uniform(o.freq_lo, o.freq_hi);
    for (int y = 0; y < o.height; ++y) {
        for (int x = 0; x < o.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double phase = 2.0 * std::numbers::pi * c / 3.0;
                const double tex = 0.2 * std::sin(fx * x + phase) * std::cos(fy * y - phase);
                s.clear(x, y, c) = std::clamp(0.5 + tex + rng.uniform(-0.1, 0.1), 0.02, 0.98);
            }
        }
    }
    // Distinct shadow columns per row, so every range band gets its share.
    const int per_row = static_cast<int>(std::round(o.shadow_fraction * o.width));
    std::vector<int> columns(o.width);
    for (int y = 0; y < o.height; ++y) {
        for (int x = 0; x < o.width; ++x) columns[x] = x;
        for (int k = 0; k < per_row; ++k) {
            const int pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(o.width - k)));
            std::swap(columns[k], columns[pick]);
            for (int c = 0; c < 3; ++c) s.clear(columns[k], y, c) = 0.0;
        }
    }
    if (o.gray_patches > 0) {
        const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(o.gray_patches))));
        const int rows = (o.gray_patches + cols - 1) / cols;
        int placed = 0;
        for (int r = 0; r < rows && placed < o.gray_patches; ++r) {
            for (int q = 0; q < cols && placed < o.gray_patches; ++q, ++placed) {
                const int x0 = (2 * q + 1) * o.width / (2 * cols) - o.patch_size / 2;
                const int y0 = (2 * r + 1) * o.height / (2 * rows) - o.patch_size / 2;
                const double level = rng.uniform(0.4, 0.8);
                for (int y = y0; y < y0 + o.patch_size; ++y) {
                    for (int x = x0; x < x0 + o.patch_size; ++x) {
                        for (int c = 0; c < 3; ++c) s.clear(x, y, c) = level;
                    }
                }
                s.patches.patches.push_back({x0, y0, o.patch_size, o.patch_size});
            }
        }
    }
    return s;
}

/// Bounds of random water conditions.
struct ParamRanges {
    double b_inf_lo = 0.2, b_inf_hi = 0.6;
    double beta_b_lo = 0.3, beta_b_hi = 0.8;
    double beta_d_lo = 0.1, beta_d_hi = 0.4;
    double white_lo = 0.5;  ///< white point channels in [white_lo, 1], max channel = 1
    bool two_exp = false;   ///< mildly range-dependent attenuation instead of constant
};

inline WaterParams random_params(DeterministicRng& rng, const ParamRanges& r) {
    WaterParams p;
    Rgb beta{};
    std::array<ExpTerms, 3> terms{};
    for (int c = 0; c < 3; ++c) {
        p.B_inf[c] = rng.uniform(r.b_inf_lo, r.b_inf_hi);
        p.beta_B[c] = rng.uniform(r.beta_b_lo, r.beta_b_hi);
        beta[c] = rng.uniform(r.beta_d_lo, r.beta_d_hi);
        // a e^{bz} + c e^{dz} with a decaying component of at most 30% of the total.
        const double share = rng.uniform(0.1, 0.3);
        terms[c] = ExpTerms{beta[c] * share, -rng.uniform(0.05, 0.3), beta[c] * (1.0 - share), 0.0};
        p.white_point[c] = rng.uniform(r.white_lo, 1.0);
    }
    const double peak = *std::max_element(p.white_point.begin(), p.white_point.end());
    for (double& w : p.white_point) w /= peak;
    p.beta_D = r.two_exp ? AttenuationModel::two_exp(terms) : AttenuationModel::constant(beta);
    return p;
}

inline double relative_error(double estimate, double truth) {
    return std::abs(estimate - truth) / std::abs(truth);
}

}  // namespace uwimf::testing
