#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scenes.hpp"
#include "uwimf/error.hpp"
#include "uwimf/metrics.hpp"

namespace uwimf {
namespace {

using testing::random_image;

LinearImage offset(const LinearImage& img, double d) {
    LinearImage out = img;
    for (double& v : out.data()) v += d;
    return out;
}

// Direct SSIM: every valid 11x11 window evaluated with explicit Gaussian weights.
double ssim_oracle(const LinearImage& a, const LinearImage& b) {
    auto lum = [](const LinearImage& img, int x, int y) {
        auto c = [&](int ch) { return std::clamp(img(x, y, ch), 0.0, 1.0); };
        return 0.299 * c(0) + 0.587 * c(1) + 0.114 * c(2);
    };
    double w[11];
    double norm = 0.0;
    for (int i = 0; i < 11; ++i) {
        w[i] = std::exp(-((i - 5) * (i - 5)) / (2 * 1.5 * 1.5));
        norm += w[i];
    }
    const double C1 = 1e-4, C2 = 9e-4;
    double total = 0.0;
    int count = 0;
    for (int y0 = 0; y0 + 11 <= a.height(); ++y0) {
        for (int x0 = 0; x0 + 11 <= a.width(); ++x0) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int j = 0; j < 11; ++j) {
                for (int i = 0; i < 11; ++i) {
                    const double k = w[i] * w[j] / (norm * norm);
                    const double va = lum(a, x0 + i, y0 + j), vb = lum(b, x0 + i, y0 + j);
                    ma += k * va;
                    mb += k * vb;
                    saa += k * va * va;
                    sbb += k * vb * vb;
                    sab += k * va * vb;
                }
            }
            const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
            total += ((2 * ma * mb + C1) * (2 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
            ++count;
        }
    }
    return total / count;
}

// UICM with explicit trimming (ceil low, floor high) and population variance.
double uicm_oracle(const LinearImage& img) {
    std::vector<double> rg, yb;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const double r = 255 * img.at(p, 0), g = 255 * img.at(p, 1), b = 255 * img.at(p, 2);
        rg.push_back(r - g);
        yb.push_back((r + g) / 2 - b);
    }
    auto stats = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t k = v.size();
        const auto lo = static_cast<std::size_t>(std::ceil(0.1 * k));
        const auto hi = static_cast<std::size_t>(std::floor(0.1 * k));
        double mu = 0.0;
        for (std::size_t i = lo; i < k - hi; ++i) mu += v[i];
        mu /= static_cast<double>(k - lo - hi);
        double var = 0.0;
        for (double x : v) var += (x - mu) * (x - mu);
        return std::pair{mu, var / static_cast<double>(k)};
    };
    const auto [mrg, vrg] = stats(rg);
    const auto [myb, vyb] = stats(yb);
    return -0.0268 * std::sqrt(mrg * mrg + myb * myb) + 0.1586 * std::sqrt(vrg + vyb);
}

TEST(Psnr, AnalyticCases) {
    DeterministicRng rng(1);
    const LinearImage a = random_image(16, 16, rng, 0.0, 0.4);
    EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
    EXPECT_NEAR(psnr(a, offset(a, 0.1)), 20.0, 1e-9);
    EXPECT_NEAR(psnr(a, offset(a, 0.5)), 10.0 * std::log10(4.0), 1e-9);
    EXPECT_NEAR(psnr(a, offset(a, 0.5)), 6.0206, 1e-4);
    EXPECT_THROW(psnr(a, LinearImage(4, 4)), InvalidInput);
}

TEST(Psnr, StrictlyDecreasingInUniformDifference) {
    DeterministicRng rng(2);
    const LinearImage a = random_image(8, 8, rng);
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 20; ++k) {
        const double p = psnr(a, offset(a, 0.02 * k));
        EXPECT_LT(p, previous);
        previous = p;
    }
}

TEST(Ssim, IdentityAndSymmetry) {
    DeterministicRng rng(3);
    const LinearImage a = random_image(24, 20, rng);
    const LinearImage b = random_image(24, 20, rng);
    EXPECT_DOUBLE_EQ(ssim(a, a), 1.0);
    EXPECT_DOUBLE_EQ(ssim(a, b), ssim(b, a));
    EXPECT_THROW(ssim(a, LinearImage(3, 3)), InvalidInput);
}

TEST(Ssim, ConstantImagesClosedForm) {
    const double c1 = 1e-4;
    const double expected = (2 * 0.5 * 0.6 + c1) / (0.25 + 0.36 + c1);
    EXPECT_NEAR(ssim(LinearImage(20, 20, 0.5), LinearImage(20, 20, 0.6)), expected, 1e-12);
    EXPECT_NEAR(expected, 0.98361, 1e-5);
    // Smaller than the window: global statistics, same closed form for constants.
    EXPECT_NEAR(ssim(LinearImage(5, 4, 0.5), LinearImage(5, 4, 0.6)), expected, 1e-12);
}

TEST(Ssim, MatchesDirectWindowedEvaluation) {
    DeterministicRng rng(4);
    for (int i = 0; i < 5; ++i) {
        const LinearImage a = random_image(23, 17, rng);
        LinearImage b = a;
        for (double& v : b.data()) v = 0.7 * v + rng.uniform(0.0, 0.3);
        EXPECT_NEAR(ssim(a, b), ssim_oracle(a, b), 1e-10);
    }
}

TEST(Uiqm, ConstantImagesScoreZero) {
    for (double v : {0.0, 0.2, 0.5, 1.0}) {
        const UiqmBreakdown b = uiqm_components(LinearImage(32, 24, v));
        EXPECT_EQ(b.uicm, 0.0);
        EXPECT_EQ(b.uism, 0.0);
        EXPECT_EQ(b.uiconm, 0.0);
        EXPECT_EQ(b.uiqm, 0.0);
    }
}

TEST(Uiqm, ColorfulnessMatchesOracle) {
    DeterministicRng rng(5);
    for (int i = 0; i < 5; ++i) {
        const LinearImage img = random_image(19, 13, rng);
        EXPECT_NEAR(uiqm_components(img).uicm, uicm_oracle(img), 1e-9);
    }
}

TEST(Uiqm, NoiseHasMoreSharpnessThanItsBlur) {
    DeterministicRng rng(6);
    const LinearImage noise = random_image(64, 64, rng);
    LinearImage blur(64, 64);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                int n = 0;
                for (int dy = -2; dy <= 2; ++dy) {
                    for (int dx = -2; dx <= 2; ++dx) {
                        const int xx = x + dx, yy = y + dy;
                        if (xx < 0 || yy < 0 || xx >= 64 || yy >= 64) continue;
                        s += noise(xx, yy, c);
                        ++n;
                    }
                }
                blur(x, y, c) = s / n;
            }
        }
    }
    EXPECT_GT(uiqm_components(noise).uism, uiqm_components(blur).uism);
}

TEST(Uiqm, CombinationUsesConfiguredWeights) {
    DeterministicRng rng(7);
    const LinearImage img = random_image(40, 40, rng);
    const UiqmBreakdown b = uiqm_components(img);
    EXPECT_NEAR(b.uiqm, 0.0282 * b.uicm + 0.2953 * b.uism + 3.5753 * b.uiconm, 1e-12);
    EXPECT_EQ(uiqm(img), b.uiqm);
    EXPECT_TRUE(std::isfinite(b.uiqm));
}

TEST(Uciqe, ConstantGrayIsZero) {
    const UciqeBreakdown b = uciqe_components(LinearImage(16, 16, 0.3));
    EXPECT_EQ(b.chroma_std, 0.0);
    EXPECT_EQ(b.luminance_contrast, 0.0);
    EXPECT_EQ(b.saturation_mean, 0.0);
    EXPECT_EQ(b.uciqe, 0.0);
}

TEST(Uciqe, BlackWhiteCheckerboard) {
    LinearImage img(16, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            for (int c = 0; c < 3; ++c) img(x, y, c) = (x + y) % 2;
        }
    }
    const UciqeBreakdown b = uciqe_components(img);
    EXPECT_NEAR(b.chroma_std, 0.0, 1e-9);
    EXPECT_EQ(b.saturation_mean, 0.0);
    EXPECT_NEAR(b.luminance_contrast, 1.0, 1e-9);
    EXPECT_NEAR(b.uciqe, 0.2745, 1e-6);
}

TEST(Uciqe, SaturationOfPrimariesIsOne) {
    LinearImage img(3, 1);
    img(0, 0, 0) = 1.0;
    img(1, 0, 1) = 0.5;
    img(2, 0, 2) = 0.25;
    EXPECT_NEAR(uciqe_components(img).saturation_mean, 1.0, 1e-12);
}

TEST(Percentile, MatchesNumpyLinear) {
    EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(percentile({10, 0}, 0.99), 9.9);
    EXPECT_DOUBLE_EQ(percentile({5}, 0.01), 5.0);
    EXPECT_THROW(percentile({}, 0.5), InvalidInput);
}

TEST(RgbError, GrayRedAndScaleInvariance) {
    LinearImage img(4, 4, 0.4);
    const PatchMask all{{{0, 0, 4, 4}}};
    EXPECT_NEAR(rgb_error(img, all), 0.0, 1e-6);
    LinearImage red(4, 4);
    for (std::size_t p = 0; p < red.pixel_count(); ++p) red.at(p, 0) = 1.0;
    EXPECT_NEAR(rgb_error(red, all), std::acos(1.0 / std::sqrt(3.0)) * 180.0 / std::numbers::pi, 1e-9);
    EXPECT_NEAR(rgb_error(red, all), 54.7356, 1e-3);

    DeterministicRng rng(8);
    const LinearImage r = random_image(6, 6, rng, 0.0, 0.5);
    LinearImage scaled = r;
    for (double& v : scaled.data()) v *= 1.7;
    const PatchMask m{{{0, 0, 3, 3}, {2, 2, 4, 4}}};
    EXPECT_NEAR(rgb_error(r, m), rgb_error(scaled, m), 1e-9);
}

TEST(RgbError, PerPatchThenMeanAveraging) {
    LinearImage img(4, 1, 0.5);
    img(0, 0, 1) = 0.0;
    img(0, 0, 2) = 0.0;  // (0.5, 0, 0): one red pixel
    const double red = std::acos(1.0 / std::sqrt(3.0)) * 180.0 / std::numbers::pi;
    // Patch A = red pixel alone, patch B = three gray pixels.
    const PatchMask m{{{0, 0, 1, 1}, {1, 0, 3, 1}}};
    EXPECT_NEAR(rgb_error(img, m), red / 2.0, 1e-6);
}

TEST(RgbError, DegenerateMasksThrow) {
    EXPECT_THROW(rgb_error(LinearImage(4, 4, 0.5), PatchMask{}), InvalidInput);
    EXPECT_THROW(rgb_error(LinearImage(4, 4, 0.5), PatchMask{{{2, 2, 4, 4}}}), InvalidInput);
    EXPECT_THROW(rgb_error(LinearImage(4, 4, 0.0), PatchMask{{{0, 0, 2, 2}}}), InvalidInput);
}

TEST(MetricsProperty, DeterministicAndOrderIndependent) {
    DeterministicRng rng(9);
    const LinearImage a = random_image(20, 20, rng);
    const LinearImage b = random_image(20, 20, rng);
    const double ua = uiqm(a), ub = uiqm(b);
    EXPECT_EQ(uiqm(b), ub);
    EXPECT_EQ(uiqm(a), ua);
    EXPECT_EQ(uciqe(a), uciqe(a));
}

}  // namespace
}  // namespace uwimf
