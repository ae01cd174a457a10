#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "uwimf/formation.hpp"
#include "uwimf/image.hpp"

namespace uwimf {

/// Knobs of the water-parameter estimator. Defaults reproduce the reference configuration.
struct EstimationConfig {
    int n_bins = 10;
    double percentile = 0.01;       ///< darkest fraction kept per range bin
    double z_eps = 0.1;             ///< ranges below this (m) are ignored
    int min_bin_samples = 5;        ///< bins with fewer pixels are dropped
    double illuminant_p = 0.01;     ///< diffusion blend factor
    int illuminant_iterations = 0;  ///< 0 selects default_illuminant_iterations()
    int starts = 20;                ///< multi-start count for every curve fit
    int blur_refinements = 3;       ///< compensate_illuminant_blur passes; 0 disables
    std::uint64_t seed = 0;
    double depth_m = 0.0;
};

/// Number of diffusion sweeps used when EstimationConfig::illuminant_iterations is 0:
/// max(2 * max(H, W), ceil(ln(1e-3) / ln(1 - p))), i.e. at least enough sweeps for the
/// initial channel-mean guess to decay to 0.1% of its weight.
int default_illuminant_iterations(int width, int height, double p);

struct DarkSample {
    std::size_t index = 0;  ///< row-major pixel index
    double z = 0.0;
    Rgb rgb{};
};

struct RangeBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t population = 0;  ///< pixels of the image falling in this bin
    double mean_range = 0.0;     ///< over retained samples
    Rgb channel_min{};           ///< over retained samples
    std::vector<DarkSample> samples;
};

struct RangeBinStats {
    std::vector<double> edges;  ///< n_bins + 1 edges over [max(z_min, z_eps), z_max]
    std::vector<RangeBin> bins; ///< non-empty bins only, in range order
};

/// Darkest `percentile` of pixels (by R + G + B) in each of `n_bins` equal-width range bins.
///
/// At least min(min_bin_samples, population) pixels are kept per bin and bins with fewer
/// than min_bin_samples pixels are dropped. Throws EstimationInfeasible when fewer than
/// two bins survive.
RangeBinStats collect_dark_pixels(const LinearImage& img, const RangeMap& z, int n_bins = 10,
                                  double percentile = 0.01, double z_eps = 0.1,
                                  int min_bin_samples = 5);

struct ChannelBackscatter {
    double B_inf = 0.0;
    double beta_B = 0.0;
    double residual_J = 0.0;
    double residual_beta = 0.0;
    double rms_error = 0.0;
};

struct BackscatterFit {
    std::array<ChannelBackscatter, 3> channels{};
    double rms_error = 0.0;  ///< over all channels and samples
    std::size_t sample_count = 0;

    Rgb B_inf() const { return {channels[0].B_inf, channels[1].B_inf, channels[2].B_inf}; }
    Rgb beta_B() const { return {channels[0].beta_B, channels[1].beta_B, channels[2].beta_B}; }
};

/// Per channel, fits obs(z) = B_inf (1 - exp(-beta_B z)) + J' exp(-beta' z) to the dark samples
/// with bounds B_inf, J' in [0, 1] and beta_B, beta' in [0, 5], using `starts` seeded uniform
/// starts refined by bounded Levenberg-Marquardt.
BackscatterFit fit_backscatter(const RangeBinStats& stats, int starts = 20, std::uint64_t seed = 0);

/// Local space average color of the direct signal, times two.
///
/// E starts at the channel means of max(D, 0) and is updated `iterations` times as
/// E <- (1 - p) * mean4(E) + p * D with edge-replicated neighbours.
LinearImage estimate_illuminant(const LinearImage& direct, int iterations, double p = 0.01);

/// Removes the spatial-averaging bias of `illuminant` given an attenuation estimate.
///
/// The shape S = exp(-beta_D(z) z) is pushed through the same diffusion and the
/// illuminant is multiplied by 2 S / estimate_illuminant(S). Where the range varies
/// within the averaging footprint, and near borders in particular, the local average
/// of exp(-beta z) is not exp(-beta z) of the local range; this ratio undoes that.
LinearImage compensate_illuminant_blur(const LinearImage& illuminant, const RangeMap& z,
                                      const AttenuationModel& model, int iterations,
                                      double p = 0.01);

struct AttenuationFit {
    AttenuationModel model;
    /// Per-channel illuminant gain g in E(z) ~ g * exp(-beta_D(z) z); divided out before
    /// the pointwise coefficients are formed.
    Rgb gain{1.0, 1.0, 1.0};
    std::vector<double> bin_centers;             ///< edge midpoints of the bins used
    std::vector<double> bin_ranges;              ///< median range of each bin used
    std::array<std::vector<double>, 3> bin_beta; ///< median pointwise coefficient per bin
    double excluded_fraction = 0.0;
};

/// Fits beta_D(z) from an illuminant map.
///
/// Pointwise coefficients -ln(E / g) / z are reduced to a per-bin median and fitted with
/// a * exp(b z) + c * exp(d z) (a, c in [0, 5]; b, d in [-5, 0]). Residuals are weighted
/// by the bin range (the fit is done on z * beta), since a fixed error in ln E turns
/// into an error of 1/z in the pointwise coefficient. Falls back to a constant
/// model (median of all pointwise values) with fewer than three bins or when the bin
/// medians coincide. Throws EstimationInfeasible if more than 90% of samples are unusable
/// (z < z_eps or E <= 0).
AttenuationFit fit_attenuation(const LinearImage& illuminant, const RangeMap& z, int n_bins = 10,
                               double z_eps = 0.1, int starts = 20, std::uint64_t seed = 0);

/// Mean illuminant over pixels within +-10% of the median range, normalized to max 1.
/// With `compensate`, each sample is first multiplied by exp(beta_D(z) z), removing the
/// path attenuation so only the ambient color remains.
Rgb estimate_white_point(const LinearImage& illuminant, const RangeMap& z,
                         const AttenuationModel* compensate = nullptr, double z_eps = 0.1);

struct WaterEstimate {
    WaterParams params;
    ComponentMaps components;
    BackscatterFit backscatter;
    AttenuationFit attenuation;
    std::size_t dark_bins = 0;
    int illuminant_iterations = 0;
};

/// Full pipeline: dark pixels, backscatter fit, backscatter removal, illuminant,
/// attenuation fit (refined by blur_refinements compensation passes), white point.
WaterEstimate estimate_water_params(const LinearImage& img, const RangeMap& z,
                                    const EstimationConfig& config = {});

}  // namespace uwimf
