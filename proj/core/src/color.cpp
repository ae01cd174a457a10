#include "uwimf/color.hpp"

#include <algorithm>
#include <cmath>

namespace uwimf {
namespace {

// sRGB primaries, D65.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

constexpr double row_sum(int r) { return kRgbToXyz[r][0] + kRgbToXyz[r][1] + kRgbToXyz[r][2]; }

constexpr double kWhiteX = row_sum(0);
constexpr double kWhiteY = row_sum(1);
constexpr double kWhiteZ = row_sum(2);

double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    if (t > delta * delta * delta) return std::cbrt(t);
    return t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

double srgb_to_linear(double encoded) {
    if (encoded <= 0.04045) return encoded / 12.92;
    return std::pow((encoded + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double linear) {
    if (linear <= 0.0031308) return linear * 12.92;
    return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

Lab rgb_to_lab(double r, double g, double b) {
    r = std::clamp(r, 0.0, 1.0);
    g = std::clamp(g, 0.0, 1.0);
    b = std::clamp(b, 0.0, 1.0);
    const double x = kRgbToXyz[0][0] * r + kRgbToXyz[0][1] * g + kRgbToXyz[0][2] * b;
    const double y = kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b;
    const double z = kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b;

    // Achromatic inputs give x/Xn == y/Yn == z/Zn up to rounding; snap so a*, b* vanish.
    double fx = lab_f(x / kWhiteX);
    double fy = lab_f(y / kWhiteY);
    double fz = lab_f(z / kWhiteZ);
    if (r == g && g == b) fx = fz = fy;

    return Lab{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

LabPlanes to_lab(const LinearImage& img) {
    LabPlanes out{GrayImage(img.width(), img.height()), GrayImage(img.width(), img.height()),
                  GrayImage(img.width(), img.height())};
    const std::size_t n = img.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        const Lab lab = rgb_to_lab(img.at(p, 0), img.at(p, 1), img.at(p, 2));
        out.L.at(p) = lab.L;
        out.a.at(p) = lab.a;
        out.b.at(p) = lab.b;
    }
    return out;
}

GrayImage luminance(const LinearImage& img) {
    GrayImage out(img.width(), img.height());
    const std::size_t n = img.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        out.at(p) = 0.299 * img.at(p, 0) + 0.587 * img.at(p, 1) + 0.114 * img.at(p, 2);
    }
    return out;
}

}  // namespace uwimf
