#pragma once

#include <vector>

#include "uwimf/image.hpp"

namespace uwimf {

/// 10 log10(1 / MSE) over all samples, dynamic range 1. Identical images give +infinity.
double psnr(const LinearImage& a, const LinearImage& b);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// Mean SSIM over the Rec. 601 luminance of both images after clamping to [0, 1].
/// Uses a Gaussian window over all fully contained positions; images smaller than the
/// window fall back to a single global-statistics evaluation.
double ssim(const LinearImage& a, const LinearImage& b, const SsimOptions& options = {});

/// Constants of the UIQM combination and of its components. Images are evaluated on
/// an 8-bit scale (samples times 255), the scale the weights were derived for.
struct UiqmConfig {
    double c1 = 0.0282;
    double c2 = 0.2953;
    double c3 = 3.5753;
    double alpha_low = 0.1;
    double alpha_high = 0.1;
    int block = 8;
    double epsilon = 1e-8;
};

struct UiqmBreakdown {
    double uicm = 0.0;
    double uism = 0.0;
    double uiconm = 0.0;
    double uiqm = 0.0;
};

UiqmBreakdown uiqm_components(const LinearImage& img, const UiqmConfig& config = {});
double uiqm(const LinearImage& img, const UiqmConfig& config = {});

struct UciqeConfig {
    double c1 = 0.4680;
    double c2 = 0.2745;
    double c3 = 0.2576;
    double low_percentile = 0.01;
    double high_percentile = 0.99;
};

struct UciqeBreakdown {
    double chroma_std = 0.0;           ///< std of CIELAB chroma / 100
    double luminance_contrast = 0.0;   ///< (p99 - p1 of L*) / 100
    double saturation_mean = 0.0;      ///< mean HSV saturation
    double uciqe = 0.0;
};

UciqeBreakdown uciqe_components(const LinearImage& img, const UciqeConfig& config = {});
double uciqe(const LinearImage& img, const UciqeConfig& config = {});

struct Patch {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

/// Rectangles covering known-achromatic reference patches.
struct PatchMask {
    std::vector<Patch> patches;
};

/// Average angle (degrees) between patch pixels and the gray axis, per patch then over
/// patches. Samples are clamped to [0, 1]; zero-norm pixels are skipped. Throws
/// InvalidInput for an empty or out-of-bounds mask and when no pixel has non-zero norm.
double rgb_error(const LinearImage& img, const PatchMask& mask);

/// Linear-interpolated percentile (numpy default) of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace uwimf
