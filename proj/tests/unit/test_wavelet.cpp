#include <gtest/gtest.h>

#include "scenes.hpp"
#include "uwimf/error.hpp"
#include "uwimf/wavelet.hpp"

namespace uwimf {
namespace {

GrayImage plane(int w, int h, std::initializer_list<double> values) {
    GrayImage g(w, h);
    std::size_t i = 0;
    for (double v : values) g.at(i++) = v;
    return g;
}

GrayImage random_plane(int w, int h, DeterministicRng& rng) {
    GrayImage g(w, h);
    for (double& v : g.data()) v = rng.uniform(-1.0, 1.0);
    return g;
}

double energy(const GrayImage& g) {
    double s = 0.0;
    for (double v : g.data()) s += v * v;
    return s;
}

TEST(Dwt2, HandAppliedKernels) {
    const Subbands b = dwt2(plane(2, 2, {1, 2, 3, 4}));
    EXPECT_EQ(b.LL.at(0), 5.0);
    EXPECT_EQ(b.LH.at(0), 2.0);
    EXPECT_EQ(b.HL.at(0), 1.0);
    EXPECT_EQ(b.HH.at(0), 0.0);
}

TEST(Dwt2, ConstantPlane) {
    const Subbands b = dwt2(GrayImage(6, 4, 0.3));
    EXPECT_EQ(b.LL.width(), 3);
    EXPECT_EQ(b.LL.height(), 2);
    for (double v : b.LL.data()) EXPECT_DOUBLE_EQ(v, 0.6);
    for (const GrayImage* g : {&b.LH, &b.HL, &b.HH}) {
        for (double v : g->data()) EXPECT_EQ(v, 0.0);
    }
}

TEST(Dwt2, HorizontalStepEdgeGoesToLH) {
    // Rows 0..2 zero, row 3 one: the step sits inside the second block row.
    GrayImage step(4, 4);
    for (int x = 0; x < 4; ++x) step(x, 3) = 1.0;
    const Subbands b = dwt2(step);
    EXPECT_GT(energy(b.LH), 0.0);
    EXPECT_EQ(energy(b.HL), 0.0);
    EXPECT_EQ(energy(b.HH), 0.0);
    EXPECT_DOUBLE_EQ(energy(b.LH), energy(b.LL));
}

TEST(Dwt2, OddSizesHaveCeilHalfBands) {
    const Subbands b = dwt2(GrayImage(5, 3, 1.0));
    EXPECT_EQ(b.LL.width(), 3);
    EXPECT_EQ(b.HH.height(), 2);
    EXPECT_EQ(b.original_width, 5);
    EXPECT_EQ(b.original_height, 3);
}

TEST(Idwt2, PerfectReconstructionRandom64) {
    DeterministicRng rng(1);
    const GrayImage x = random_plane(64, 64, rng);
    const GrayImage back = idwt2(dwt2(x));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back.data()[i], x.data()[i], 1e-6);
}

TEST(Idwt2, LowPassIsBlockAverage) {
    DeterministicRng rng(2);
    const GrayImage x = random_plane(8, 6, rng);
    Subbands b = dwt2(x);
    for (GrayImage* g : {&b.LH, &b.HL, &b.HH}) {
        for (double& v : g->data()) v = 0.0;
    }
    const GrayImage low = idwt2(b);
    for (int y = 0; y < 6; ++y) {
        for (int x0 = 0; x0 < 8; ++x0) {
            const int bx = x0 / 2 * 2, by = y / 2 * 2;
            const double mean = (x(bx, by) + x(bx + 1, by) + x(bx, by + 1) + x(bx + 1, by + 1)) / 4.0;
            EXPECT_NEAR(low(x0, y), mean, 1e-14);
        }
    }
}

TEST(Idwt2, ZeroBandsGiveZeroImage) {
    Subbands b{GrayImage(3, 2), GrayImage(3, 2), GrayImage(3, 2), GrayImage(3, 2), 5, 4};
    const GrayImage out = idwt2(b);
    EXPECT_EQ(out.width(), 5);
    EXPECT_EQ(out.height(), 4);
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Idwt2, InconsistentBandsThrow) {
    Subbands b{GrayImage(3, 2), GrayImage(3, 2), GrayImage(2, 2), GrayImage(3, 2), 6, 4};
    EXPECT_THROW(idwt2(b), InvalidInput);
    Subbands wrong_size{GrayImage(3, 2), GrayImage(3, 2), GrayImage(3, 2), GrayImage(3, 2), 9, 4};
    EXPECT_THROW(idwt2(wrong_size), InvalidInput);
}

TEST(Dwt2Rgb, ConstantColorAndRoundTrip) {
    LinearImage img(6, 6);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        img.at(p, 0) = 0.1;
        img.at(p, 1) = 0.5;
        img.at(p, 2) = 0.9;
    }
    const auto bands = dwt2_rgb(img);
    EXPECT_DOUBLE_EQ(bands[0].LL.at(0), 0.2);
    EXPECT_DOUBLE_EQ(bands[1].LL.at(4), 1.0);
    EXPECT_DOUBLE_EQ(bands[2].LL.at(8), 1.8);

    DeterministicRng rng(3);
    const LinearImage r = testing::random_image(7, 5, rng);
    const LinearImage back = idwt2_rgb(dwt2_rgb(r));
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(back.data()[i], r.data()[i], 1e-6);
}

TEST(Dwt2Rgb, RedBlueCheckerboardHasHighFrequencyInBoth) {
    LinearImage img(8, 8);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            img(x, y, (x + y) % 2 == 0 ? 0 : 2) = 1.0;
        }
    }
    const auto bands = dwt2_rgb(img);
    EXPECT_GT(energy(bands[0].HH), 0.0);
    EXPECT_GT(energy(bands[2].HH), 0.0);
    EXPECT_EQ(energy(bands[1].HH), 0.0);
}

// Properties

TEST(WaveletProperty, EnergyPreservedOnEvenSizes) {
    DeterministicRng rng(4);
    for (int i = 0; i < 50; ++i) {
        const int w = 2 * (1 + static_cast<int>(rng.below(40)));
        const int h = 2 * (1 + static_cast<int>(rng.below(40)));
        const GrayImage x = random_plane(w, h, rng);
        const Subbands b = dwt2(x);
        const double bands = energy(b.LL) + energy(b.LH) + energy(b.HL) + energy(b.HH);
        // The 1/2 kernels form an orthogonal 4x4 block transform.
        EXPECT_NEAR(bands / energy(x), 1.0, 1e-12);
    }
}

TEST(WaveletProperty, Linearity) {
    DeterministicRng rng(5);
    for (int i = 0; i < 20; ++i) {
        const GrayImage x = random_plane(9, 7, rng);
        const GrayImage y = random_plane(9, 7, rng);
        const double a = rng.uniform(-2, 2), c = rng.uniform(-2, 2);
        GrayImage mix(9, 7);
        for (std::size_t k = 0; k < mix.size(); ++k) mix.data()[k] = a * x.data()[k] + c * y.data()[k];
        const Subbands bm = dwt2(mix), bx = dwt2(x), by = dwt2(y);
        for (std::size_t k = 0; k < bm.LL.size(); ++k) {
            EXPECT_NEAR(bm.LL.data()[k], a * bx.LL.data()[k] + c * by.LL.data()[k], 1e-12);
            EXPECT_NEAR(bm.HH.data()[k], a * bx.HH.data()[k] + c * by.HH.data()[k], 1e-12);
        }
    }
}

TEST(WaveletProperty, ReconstructionOnArbitrarySizes) {
    DeterministicRng rng(6);
    for (int i = 0; i < 200; ++i) {
        const int w = 1 + static_cast<int>(rng.below(60));
        const int h = 1 + static_cast<int>(rng.below(60));
        const GrayImage x = random_plane(w, h, rng);
        const GrayImage back = idwt2(dwt2(x));
        ASSERT_EQ(back.width(), w);
        ASSERT_EQ(back.height(), h);
        for (std::size_t k = 0; k < x.size(); ++k) ASSERT_NEAR(back.data()[k], x.data()[k], 1e-6);
    }
}

}  // namespace
}  // namespace uwimf
