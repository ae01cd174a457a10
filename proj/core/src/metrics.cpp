#include "uwimf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "uwimf/color.hpp"

namespace uwimf {
namespace {

// Welford accumulator: a run of identical values has exactly zero variance.
struct RunningStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    double variance() const { return n > 0 ? m2 / static_cast<double>(n) : 0.0; }
};

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const double center = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - center;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable "valid" filtering of a plane.
GrayImage filter_valid(const GrayImage& in, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    const int ow = in.width() - n + 1;
    const int oh = in.height() - n + 1;
    GrayImage rows(ow, in.height());
    for (int y = 0; y < in.height(); ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[i] * in(x + i, y);
            rows(x, y) = s;
        }
    }
    GrayImage out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[i] * rows(x, y + i);
            out(x, y) = s;
        }
    }
    return out;
}

GrayImage multiply(const GrayImage& a, const GrayImage& b) {
    GrayImage out(a.width(), a.height());
    for (std::size_t p = 0; p < out.pixel_count(); ++p) out.at(p) = a.at(p) * b.at(p);
    return out;
}

double ssim_term(double mu_a, double mu_b, double var_a, double var_b, double cov, double c1,
                 double c2) {
    return ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
           ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
}

// Alpha-trimmed mean: drop ceil(alpha_low * K) smallest and floor(alpha_high * K) largest.
double trimmed_mean(std::vector<double> values, double alpha_low, double alpha_high) {
    std::sort(values.begin(), values.end());
    const std::size_t k = values.size();
    const auto lo = static_cast<std::size_t>(std::ceil(alpha_low * static_cast<double>(k)));
    const auto hi = static_cast<std::size_t>(std::floor(alpha_high * static_cast<double>(k)));
    if (lo + hi >= k) return 0.0;
    RunningStats s;
    for (std::size_t i = lo; i < k - hi; ++i) s.push(values[i]);
    return s.mean;
}

double mean_square_deviation(const std::vector<double>& values, double mu) {
    double acc = 0.0;
    for (double v : values) acc += (v - mu) * (v - mu);
    return acc / static_cast<double>(values.size());
}

double uicm(const LinearImage& img8, const UiqmConfig& cfg) {
    const std::size_t n = img8.pixel_count();
    std::vector<double> rg(n);
    std::vector<double> yb(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double r = img8.at(p, 0);
        const double g = img8.at(p, 1);
        const double b = img8.at(p, 2);
        rg[p] = r - g;
        yb[p] = 0.5 * (r + g) - b;
    }
    const double mu_rg = trimmed_mean(rg, cfg.alpha_low, cfg.alpha_high);
    const double mu_yb = trimmed_mean(yb, cfg.alpha_low, cfg.alpha_high);
    const double var_rg = mean_square_deviation(rg, mu_rg);
    const double var_yb = mean_square_deviation(yb, mu_yb);
    return -0.0268 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb) +
           0.1586 * std::sqrt(var_rg + var_yb);
}

// Sobel gradient magnitude rescaled to [0, 255], then multiplied by the channel itself.
GrayImage sobel_edge_map(const GrayImage& ch, double eps) {
    const int w = ch.width();
    const int h = ch.height();
    auto at = [&](int x, int y) {
        return ch(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
    };
    GrayImage mag(w, h);
    double peak = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            mag(x, y) = std::hypot(gx, gy);
            peak = std::max(peak, mag(x, y));
        }
    }
    if (peak > eps) {
        for (double& v : mag.data()) v *= 255.0 / peak;
    }
    return multiply(mag, ch);
}

// Block-wise ln(max / min); blocks whose min or max is below eps contribute nothing.
double eme(const GrayImage& plane, int block, double eps) {
    const int k1 = plane.width() / block;
    const int k2 = plane.height() / block;
    if (k1 == 0 || k2 == 0) return 0.0;
    double acc = 0.0;
    for (int by = 0; by < k2; ++by) {
        for (int bx = 0; bx < k1; ++bx) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (int y = by * block; y < (by + 1) * block; ++y) {
                for (int x = bx * block; x < (bx + 1) * block; ++x) {
                    lo = std::min(lo, plane(x, y));
                    hi = std::max(hi, plane(x, y));
                }
            }
            if (lo < eps || hi < eps) continue;
            acc += std::log(hi / lo);
        }
    }
    return 2.0 / (k1 * k2) * acc;
}

double uism(const LinearImage& img8, const UiqmConfig& cfg) {
    constexpr double weights[3] = {0.299, 0.587, 0.114};
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        const GrayImage edges = sobel_edge_map(extract_channel(img8, c), cfg.epsilon);
        acc += weights[c] * eme(edges, cfg.block, cfg.epsilon);
    }
    return acc;
}

// logAMEE over blocks of all three channels: -1/(k1 k2) sum r ln r with r = (max-min)/(max+min).
double uiconm(const LinearImage& img8, const UiqmConfig& cfg) {
    const int block = cfg.block;
    const int k1 = img8.width() / block;
    const int k2 = img8.height() / block;
    if (k1 == 0 || k2 == 0) return 0.0;
    double acc = 0.0;
    for (int by = 0; by < k2; ++by) {
        for (int bx = 0; bx < k1; ++bx) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (int y = by * block; y < (by + 1) * block; ++y) {
                for (int x = bx * block; x < (bx + 1) * block; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        lo = std::min(lo, img8(x, y, c));
                        hi = std::max(hi, img8(x, y, c));
                    }
                }
            }
            const double top = hi - lo;
            const double bottom = hi + lo;
            if (top < cfg.epsilon || bottom < cfg.epsilon) continue;
            const double ratio = top / bottom;
            acc += ratio * std::log(ratio);
        }
    }
    return -acc / (k1 * k2);
}

}  // namespace

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidInput("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
}

double psnr(const LinearImage& a, const LinearImage& b) {
    validate(a);
    validate(b);
    require_same_size(a, b, "psnr");
    double acc = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) acc += (da[i] - db[i]) * (da[i] - db[i]);
    const double mse = acc / static_cast<double>(da.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const LinearImage& a, const LinearImage& b, const SsimOptions& options) {
    validate(a);
    validate(b);
    require_same_size(a, b, "ssim");
    const GrayImage la = luminance(clamped(a));
    const GrayImage lb = luminance(clamped(b));
    const double c1 = std::pow(options.k1 * options.dynamic_range, 2);
    const double c2 = std::pow(options.k2 * options.dynamic_range, 2);

    if (la.width() < options.window || la.height() < options.window) {
        RunningStats sa;
        RunningStats sb;
        for (std::size_t p = 0; p < la.pixel_count(); ++p) {
            sa.push(la.at(p));
            sb.push(lb.at(p));
        }
        double cov = 0.0;
        for (std::size_t p = 0; p < la.pixel_count(); ++p) {
            cov += (la.at(p) - sa.mean) * (lb.at(p) - sb.mean);
        }
        cov /= static_cast<double>(la.pixel_count());
        return ssim_term(sa.mean, sb.mean, sa.variance(), sb.variance(), cov, c1, c2);
    }

    const std::vector<double> k = gaussian_kernel(options.window, options.sigma);
    const GrayImage mu_a = filter_valid(la, k);
    const GrayImage mu_b = filter_valid(lb, k);
    const GrayImage aa = filter_valid(multiply(la, la), k);
    const GrayImage bb = filter_valid(multiply(lb, lb), k);
    const GrayImage ab = filter_valid(multiply(la, lb), k);
    double acc = 0.0;
    for (std::size_t p = 0; p < mu_a.pixel_count(); ++p) {
        const double ma = mu_a.at(p);
        const double mb = mu_b.at(p);
        const double var_a = aa.at(p) - ma * ma;
        const double var_b = bb.at(p) - mb * mb;
        const double cov = ab.at(p) - ma * mb;
        acc += ssim_term(ma, mb, var_a, var_b, cov, c1, c2);
    }
    return acc / static_cast<double>(mu_a.pixel_count());
}

UiqmBreakdown uiqm_components(const LinearImage& img, const UiqmConfig& config) {
    validate(img);
    LinearImage img8 = clamped(img);
    for (double& v : img8.data()) v *= 255.0;
    UiqmBreakdown out;
    out.uicm = uicm(img8, config);
    out.uism = uism(img8, config);
    out.uiconm = uiconm(img8, config);
    out.uiqm = config.c1 * out.uicm + config.c2 * out.uism + config.c3 * out.uiconm;
    return out;
}

double uiqm(const LinearImage& img, const UiqmConfig& config) {
    return uiqm_components(img, config).uiqm;
}

UciqeBreakdown uciqe_components(const LinearImage& img, const UciqeConfig& config) {
    validate(img);
    const LinearImage rgb = clamped(img);
    const std::size_t n = rgb.pixel_count();
    RunningStats chroma;
    RunningStats saturation;
    std::vector<double> lightness(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double r = rgb.at(p, 0);
        const double g = rgb.at(p, 1);
        const double b = rgb.at(p, 2);
        const Lab lab = rgb_to_lab(r, g, b);
        lightness[p] = lab.L;
        chroma.push(std::hypot(lab.a, lab.b));
        const double hi = std::max({r, g, b});
        const double lo = std::min({r, g, b});
        saturation.push(hi > 0.0 ? (hi - lo) / hi : 0.0);
    }
    UciqeBreakdown out;
    out.chroma_std = std::sqrt(chroma.variance()) / 100.0;
    out.luminance_contrast =
        (percentile(lightness, config.high_percentile) - percentile(lightness, config.low_percentile)) /
        100.0;
    out.saturation_mean = saturation.mean;
    out.uciqe = config.c1 * out.chroma_std + config.c2 * out.luminance_contrast +
                config.c3 * out.saturation_mean;
    return out;
}

double uciqe(const LinearImage& img, const UciqeConfig& config) {
    return uciqe_components(img, config).uciqe;
}

double rgb_error(const LinearImage& img, const PatchMask& mask) {
    validate(img);
    if (mask.patches.empty()) throw InvalidInput("rgb_error: patch mask is empty");
    constexpr double kDegrees = 180.0 / std::numbers::pi;
    const double sqrt3 = std::sqrt(3.0);
    double total = 0.0;
    int used = 0;
    for (const Patch& patch : mask.patches) {
        if (patch.w < 1 || patch.h < 1 || patch.x < 0 || patch.y < 0 ||
            patch.x + patch.w > img.width() || patch.y + patch.h > img.height()) {
            throw InvalidInput("rgb_error: patch lies outside the image");
        }
        double sum = 0.0;
        int count = 0;
        for (int y = patch.y; y < patch.y + patch.h; ++y) {
            for (int x = patch.x; x < patch.x + patch.w; ++x) {
                const double r = std::clamp(img(x, y, 0), 0.0, 1.0);
                const double g = std::clamp(img(x, y, 1), 0.0, 1.0);
                const double b = std::clamp(img(x, y, 2), 0.0, 1.0);
                const double norm = std::sqrt(r * r + g * g + b * b);
                if (norm == 0.0) continue;
                const double cosine = std::clamp((r + g + b) / (sqrt3 * norm), -1.0, 1.0);
                sum += std::acos(cosine) * kDegrees;
                ++count;
            }
        }
        if (count == 0) continue;
        total += sum / count;
        ++used;
    }
    if (used == 0) throw InvalidInput("rgb_error: every masked pixel has zero norm");
    return total / used;
}

}  // namespace uwimf
