#include "uwimf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "uwimf/least_squares.hpp"
#include "uwimf/rng.hpp"

namespace uwimf {
namespace {

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

// Equal-width bin index over [lo, hi].
int bin_of(double z, double lo, double width, int n_bins) {
    if (width <= 0.0) return 0;
    const int b = static_cast<int>(std::floor((z - lo) / width));
    return std::clamp(b, 0, n_bins - 1);
}

double backscatter_model(double z, std::span<const double> p, std::span<double> g) {
    const double eb = std::exp(-p[1] * z);
    const double er = std::exp(-p[3] * z);
    g[0] = 1.0 - eb;
    g[1] = p[0] * z * eb;
    g[2] = er;
    g[3] = -p[2] * z * er;
    return p[0] * (1.0 - eb) + p[2] * er;
}

double two_exp_model(double z, std::span<const double> p, std::span<double> g) {
    const double e1 = std::exp(p[1] * z);
    const double e2 = std::exp(p[3] * z);
    g[0] = e1;
    g[1] = p[0] * z * e1;
    g[2] = e2;
    g[3] = p[2] * z * e2;
    return p[0] * e1 + p[2] * e2;
}

// z * beta(z): fitting this to z * beta~ weights each bin by its range, matching the
// 1/z growth of the pointwise estimate's error.
double optical_depth_model(double z, std::span<const double> p, std::span<double> g) {
    const double v = two_exp_model(z, p, g);
    for (double& d : g) d *= z;
    return z * v;
}

}  // namespace

int default_illuminant_iterations(int width, int height, double p) {
    const int spatial = 2 * std::max(width, height);
    if (!(p > 0.0) || p >= 1.0) return spatial;
    const double decay = std::ceil(std::log(1e-3) / std::log1p(-p));
    return std::max(spatial, static_cast<int>(decay));
}

RangeBinStats collect_dark_pixels(const LinearImage& img, const RangeMap& z, int n_bins,
                                  double percentile, double z_eps, int min_bin_samples) {
    validate(img);
    validate(z);
    require_same_size(img, z, "collect_dark_pixels");
    if (n_bins < 1) throw InvalidInput("n_bins must be at least 1");
    if (!(percentile > 0.0) || percentile > 1.0) throw InvalidInput("percentile must lie in (0, 1]");

    const std::size_t n = z.pixel_count();
    double z_lo = std::numeric_limits<double>::infinity();
    double z_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < n; ++p) {
        if (z.at(p) < z_eps) continue;
        z_lo = std::min(z_lo, z.at(p));
        z_hi = std::max(z_hi, z.at(p));
    }
    if (!std::isfinite(z_lo)) {
        throw EstimationInfeasible("no pixel has range above " + std::to_string(z_eps) + " m");
    }

    RangeBinStats stats;
    const double width = (z_hi - z_lo) / n_bins;
    stats.edges.resize(static_cast<std::size_t>(n_bins) + 1);
    for (int b = 0; b <= n_bins; ++b) stats.edges[b] = z_lo + width * b;
    stats.edges.back() = z_hi;

    // (brightness, pixel) per bin; pixel index breaks ties deterministically.
    std::vector<std::vector<std::pair<double, std::size_t>>> members(n_bins);
    for (std::size_t p = 0; p < n; ++p) {
        if (z.at(p) < z_eps) continue;
        const double brightness = img.at(p, 0) + img.at(p, 1) + img.at(p, 2);
        members[bin_of(z.at(p), z_lo, width, n_bins)].emplace_back(brightness, p);
    }

    for (int b = 0; b < n_bins; ++b) {
        auto& list = members[b];
        if (list.empty() || static_cast<int>(list.size()) < min_bin_samples) continue;
        std::sort(list.begin(), list.end());
        const auto wanted = static_cast<std::size_t>(
            std::ceil(percentile * static_cast<double>(list.size()) - 1e-9));
        const std::size_t keep =
            std::min(list.size(), std::max(wanted, static_cast<std::size_t>(std::max(min_bin_samples, 1))));

        RangeBin bin;
        bin.lower = stats.edges[b];
        bin.upper = stats.edges[b + 1];
        bin.population = list.size();
        bin.channel_min = {std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
        double range_sum = 0.0;
        for (std::size_t k = 0; k < keep; ++k) {
            const std::size_t p = list[k].second;
            DarkSample s{p, z.at(p), {img.at(p, 0), img.at(p, 1), img.at(p, 2)}};
            range_sum += s.z;
            for (int c = 0; c < 3; ++c) bin.channel_min[c] = std::min(bin.channel_min[c], s.rgb[c]);
            bin.samples.push_back(s);
        }
        bin.mean_range = range_sum / static_cast<double>(keep);
        stats.bins.push_back(std::move(bin));
    }

    if (stats.bins.size() < 2) {
        throw EstimationInfeasible("dark-pixel search found " + std::to_string(stats.bins.size()) +
                                   " usable range bin(s); at least 2 are required");
    }
    return stats;
}

BackscatterFit fit_backscatter(const RangeBinStats& stats, int starts, std::uint64_t seed) {
    if (stats.bins.size() < 2) {
        throw EstimationInfeasible("backscatter fit needs at least 2 non-empty range bins");
    }
    std::vector<double> xs;
    std::array<std::vector<double>, 3> ys;
    for (const RangeBin& bin : stats.bins) {
        for (const DarkSample& s : bin.samples) {
            xs.push_back(s.z);
            for (int c = 0; c < 3; ++c) ys[c].push_back(s.rgb[c]);
        }
    }

    const lsq::Bounds bounds{{0.0, 0.0, 0.0, 0.0}, {1.0, 5.0, 1.0, 5.0}};
    BackscatterFit fit;
    fit.sample_count = xs.size();
    double total_sq = 0.0;
    for (int c = 0; c < 3; ++c) {
        ChannelBackscatter& out = fit.channels[c];
        const bool all_zero = std::all_of(ys[c].begin(), ys[c].end(),
                                          [](double v) { return std::abs(v) <= 1e-12; });
        if (all_zero) {
            // No signal: every parameter is unidentifiable, report the zero model.
            double sq = 0.0;
            for (double v : ys[c]) sq += v * v;
            out.rms_error = std::sqrt(sq / static_cast<double>(xs.size()));
            total_sq += sq;
            continue;
        }
        const lsq::Result r = lsq::multi_start_fit(xs, ys[c], backscatter_model, bounds, starts,
                                                   derive_seed(seed, static_cast<std::uint64_t>(c)));
        if (r.params.empty()) {
            throw EstimationInfeasible("backscatter fit diverged for every start");
        }
        out.B_inf = r.params[0];
        out.beta_B = r.params[1];
        out.residual_J = r.params[2];
        out.residual_beta = r.params[3];
        out.rms_error = std::sqrt(r.cost / static_cast<double>(xs.size()));
        total_sq += r.cost;
    }
    fit.rms_error = std::sqrt(total_sq / (3.0 * static_cast<double>(xs.size())));
    return fit;
}

LinearImage estimate_illuminant(const LinearImage& direct, int iterations, double p) {
    validate(direct, "direct signal");
    if (iterations < 0) throw InvalidInput("illuminant iterations must be non-negative");
    if (!(p >= 0.0) || p > 1.0) throw InvalidInput("illuminant blend factor must lie in [0, 1]");

    LinearImage source = direct;
    for (double& v : source.data()) v = std::max(v, 0.0);

    const int w = source.width();
    const int h = source.height();
    const Rgb means = channel_means(source);
    LinearImage current(w, h);
    for (std::size_t q = 0; q < current.pixel_count(); ++q) {
        for (int c = 0; c < 3; ++c) current.at(q, c) = means[c];
    }
    LinearImage next(w, h);
    for (int it = 0; it < iterations; ++it) {
        for (int y = 0; y < h; ++y) {
            const int yu = std::max(y - 1, 0);
            const int yd = std::min(y + 1, h - 1);
            for (int x = 0; x < w; ++x) {
                const int xl = std::max(x - 1, 0);
                const int xr = std::min(x + 1, w - 1);
                for (int c = 0; c < 3; ++c) {
                    const double avg = 0.25 * (current(xl, y, c) + current(xr, y, c) +
                                               current(x, yu, c) + current(x, yd, c));
                    next(x, y, c) = (1.0 - p) * avg + p * source(x, y, c);
                }
            }
        }
        std::swap(current, next);
    }
    for (double& v : current.data()) v *= 2.0;
    return current;
}

LinearImage compensate_illuminant_blur(const LinearImage& illuminant, const RangeMap& z,
                                      const AttenuationModel& model, int iterations, double p) {
    validate(illuminant, "illuminant");
    require_same_size(illuminant, z, "compensate_illuminant_blur");
    LinearImage shape(z.width(), z.height());
    for (std::size_t q = 0; q < z.pixel_count(); ++q) {
        for (int c = 0; c < 3; ++c) shape.at(q, c) = std::exp(-model.beta(c, z.at(q)) * z.at(q));
    }
    const LinearImage blurred = estimate_illuminant(shape, iterations, p);
    LinearImage out = illuminant;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double b = blurred.data()[i];
        if (b > 0.0) out.data()[i] *= 2.0 * shape.data()[i] / b;
    }
    return out;
}

AttenuationFit fit_attenuation(const LinearImage& illuminant, const RangeMap& z, int n_bins,
                               double z_eps, int starts, std::uint64_t seed) {
    validate(illuminant, "illuminant");
    validate(z);
    require_same_size(illuminant, z, "fit_attenuation");
    if (n_bins < 1) throw InvalidInput("n_bins must be at least 1");

    const std::size_t n = z.pixel_count();
    std::size_t excluded = 0;
    double z_lo = std::numeric_limits<double>::infinity();
    double z_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < n; ++p) {
        if (z.at(p) < z_eps) {
            excluded += 3;
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            if (!(illuminant.at(p, c) > 0.0)) ++excluded;
        }
        z_lo = std::min(z_lo, z.at(p));
        z_hi = std::max(z_hi, z.at(p));
    }
    AttenuationFit fit;
    fit.excluded_fraction = static_cast<double>(excluded) / (3.0 * static_cast<double>(n));
    if (fit.excluded_fraction > 0.9 || !std::isfinite(z_lo)) {
        throw EstimationInfeasible("attenuation fit: more than 90% of samples are unusable");
    }
    const double width = (z_hi - z_lo) / n_bins;

    // Per bin and channel: ranges and log-illuminant of usable samples.
    struct BinData {
        std::array<std::vector<double>, 3> z;
        std::array<std::vector<double>, 3> log_e;
        std::vector<double> all_z;
    };
    std::vector<BinData> bins(n_bins);
    for (std::size_t p = 0; p < n; ++p) {
        const double range = z.at(p);
        if (range < z_eps) continue;
        BinData& bin = bins[bin_of(range, z_lo, width, n_bins)];
        bin.all_z.push_back(range);
        for (int c = 0; c < 3; ++c) {
            const double e = illuminant.at(p, c);
            if (!(e > 0.0)) continue;
            bin.z[c].push_back(range);
            bin.log_e[c].push_back(std::log(e));
        }
    }

    std::vector<int> used;
    for (int b = 0; b < n_bins; ++b) {
        bool ok = !bins[b].all_z.empty();
        for (int c = 0; c < 3 && ok; ++c) ok = !bins[b].z[c].empty();
        if (ok) used.push_back(b);
    }
    if (used.empty()) throw EstimationInfeasible("attenuation fit: no usable range bins");

    for (int b : used) {
        const double lower = z_lo + width * b;
        fit.bin_centers.push_back(lower + 0.5 * width);
        fit.bin_ranges.push_back(median_of(bins[b].all_z));
    }

    std::array<ExpTerms, 3> terms{};
    Rgb constant_beta{};
    bool use_constant = used.size() < 3;
    for (int c = 0; c < 3; ++c) {
        // Gain: least-squares line through (median z, median ln E) of each bin.
        double log_gain = 0.0;
        if (used.size() >= 2) {
            std::vector<double> bx;
            std::vector<double> by;
            for (int b : used) {
                bx.push_back(median_of(bins[b].z[c]));
                by.push_back(median_of(bins[b].log_e[c]));
            }
            const double mx = std::accumulate(bx.begin(), bx.end(), 0.0) / bx.size();
            const double my = std::accumulate(by.begin(), by.end(), 0.0) / by.size();
            double sxx = 0.0;
            double sxy = 0.0;
            for (std::size_t k = 0; k < bx.size(); ++k) {
                sxx += (bx[k] - mx) * (bx[k] - mx);
                sxy += (bx[k] - mx) * (by[k] - my);
            }
            if (sxx > 0.0) log_gain = my - (sxy / sxx) * mx;
        }
        fit.gain[c] = std::exp(log_gain);

        std::vector<double> all_beta;
        for (int b : used) {
            std::vector<double> beta;
            beta.reserve(bins[b].z[c].size());
            for (std::size_t k = 0; k < bins[b].z[c].size(); ++k) {
                beta.push_back(-(bins[b].log_e[c][k] - log_gain) / bins[b].z[c][k]);
            }
            all_beta.insert(all_beta.end(), beta.begin(), beta.end());
            fit.bin_beta[c].push_back(median_of(std::move(beta)));
        }
        constant_beta[c] = std::max(median_of(std::move(all_beta)), 0.0);

    }

    bool all_flat = true;
    for (int c = 0; c < 3; ++c) {
        const auto [lo, hi] = std::minmax_element(fit.bin_beta[c].begin(), fit.bin_beta[c].end());
        if (*hi - *lo > 1e-12 * std::max(1.0, std::abs(*hi))) all_flat = false;
    }
    use_constant = use_constant || all_flat;

    if (use_constant) {
        fit.model = AttenuationModel::constant(constant_beta);
        return fit;
    }

    const lsq::Bounds bounds{{0.0, -5.0, 0.0, -5.0}, {5.0, 0.0, 5.0, 0.0}};
    for (int c = 0; c < 3; ++c) {
        std::vector<double> depth(fit.bin_ranges.size());
        for (std::size_t k = 0; k < depth.size(); ++k) depth[k] = fit.bin_ranges[k] * fit.bin_beta[c][k];
        const lsq::Result r =
            lsq::multi_start_fit(fit.bin_ranges, depth, optical_depth_model, bounds, starts,
                                 derive_seed(seed, 100 + static_cast<std::uint64_t>(c)));
        if (r.params.empty()) throw EstimationInfeasible("attenuation fit diverged for every start");
        terms[c] = ExpTerms{r.params[0], r.params[1], r.params[2], r.params[3]};
    }
    fit.model = AttenuationModel::two_exp(terms);
    return fit;
}

Rgb estimate_white_point(const LinearImage& illuminant, const RangeMap& z,
                         const AttenuationModel* compensate, double z_eps) {
    validate(illuminant, "illuminant");
    validate(z);
    require_same_size(illuminant, z, "estimate_white_point");

    const std::size_t n = z.pixel_count();
    std::vector<double> ranges;
    for (std::size_t p = 0; p < n; ++p) {
        if (z.at(p) >= z_eps) ranges.push_back(z.at(p));
    }
    if (ranges.empty()) {
        ranges.assign(z.data().begin(), z.data().end());
    }
    const double med = median_of(ranges);
    const double band = 0.1 * med;

    auto accumulate_band = [&](bool restrict_band, Rgb& sum) {
        std::size_t count = 0;
        sum = {0.0, 0.0, 0.0};
        for (std::size_t p = 0; p < n; ++p) {
            const double range = z.at(p);
            if (restrict_band && std::abs(range - med) > band) continue;
            for (int c = 0; c < 3; ++c) {
                double e = illuminant.at(p, c);
                if (compensate != nullptr) e *= std::exp(compensate->beta(c, range) * range);
                sum[c] += e;
            }
            ++count;
        }
        return count;
    };

    Rgb sum{};
    std::size_t count = accumulate_band(true, sum);
    if (count == 0) count = accumulate_band(false, sum);

    Rgb white{};
    for (int c = 0; c < 3; ++c) white[c] = sum[c] / static_cast<double>(count);
    const double peak = *std::max_element(white.begin(), white.end());
    if (!(peak > 0.0) || !std::isfinite(peak)) return {1.0, 1.0, 1.0};
    for (double& w : white) w = std::clamp(w / peak, 1e-6, 1.0);
    return white;
}

WaterEstimate estimate_water_params(const LinearImage& img, const RangeMap& z,
                                    const EstimationConfig& config) {
    validate(img);
    validate(z);
    require_same_size(img, z, "estimate_water_params");

    WaterEstimate out;
    const RangeBinStats stats = collect_dark_pixels(img, z, config.n_bins, config.percentile,
                                                    config.z_eps, config.min_bin_samples);
    out.dark_bins = stats.bins.size();
    out.backscatter = fit_backscatter(stats, config.starts, config.seed);

    const LinearImage backscatter =
        backscatter_map(z, out.backscatter.B_inf(), out.backscatter.beta_B());
    LinearImage direct(img.width(), img.height());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        direct.data()[i] = std::max(img.data()[i] - backscatter.data()[i], 0.0);
    }

    out.illuminant_iterations =
        config.illuminant_iterations > 0
            ? config.illuminant_iterations
            : default_illuminant_iterations(img.width(), img.height(), config.illuminant_p);
    const LinearImage raw_illuminant =
        estimate_illuminant(direct, out.illuminant_iterations, config.illuminant_p);

    out.attenuation =
        fit_attenuation(raw_illuminant, z, config.n_bins, config.z_eps, config.starts, config.seed);
    LinearImage illuminant = raw_illuminant;
    for (int r = 0; r < config.blur_refinements; ++r) {
        illuminant = compensate_illuminant_blur(raw_illuminant, z, out.attenuation.model,
                                                out.illuminant_iterations, config.illuminant_p);
        out.attenuation =
            fit_attenuation(illuminant, z, config.n_bins, config.z_eps, config.starts, config.seed);
    }

    out.params.B_inf = out.backscatter.B_inf();
    out.params.beta_B = out.backscatter.beta_B();
    out.params.beta_D = out.attenuation.model;
    out.params.white_point =
        estimate_white_point(illuminant, z, &out.attenuation.model, config.z_eps);
    out.params.depth_m = config.depth_m;
    out.params.validate();
    out.components = make_components(z, out.params);
    return out;
}

}  // namespace uwimf
