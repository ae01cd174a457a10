#include "uwimf/image.hpp"

#include <algorithm>

namespace uwimf {

void validate(const LinearImage& img, const char* what) {
    if (img.empty()) throw InvalidInput(std::string(what) + " is empty");
    if (!img.all_finite()) throw InvalidInput(std::string(what) + " contains non-finite values");
}

void validate(const RangeMap& z, const char* what) {
    if (z.empty()) throw InvalidInput(std::string(what) + " is empty");
    for (double v : z.data()) {
        if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " contains non-finite values");
        if (v < 0.0) throw InvalidInput(std::string(what) + " contains negative ranges");
    }
}

LinearImage clamped(const LinearImage& img, double lo, double hi) {
    LinearImage out = img;
    for (double& v : out.data()) v = std::clamp(v, lo, hi);
    return out;
}

Rgb channel_means(const LinearImage& img) {
    Rgb sum{0.0, 0.0, 0.0};
    const std::size_t n = img.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) sum[c] += img.at(p, c);
    }
    for (double& s : sum) s /= static_cast<double>(n);
    return sum;
}

GrayImage extract_channel(const LinearImage& img, int channel) {
    GrayImage out(img.width(), img.height());
    const std::size_t n = img.pixel_count();
    for (std::size_t p = 0; p < n; ++p) out.at(p) = img.at(p, channel);
    return out;
}

}  // namespace uwimf
