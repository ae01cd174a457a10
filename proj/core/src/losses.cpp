#include "uwimf/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uwimf/metrics.hpp"

namespace uwimf {
namespace {

double mean_log(std::span<const double> scores, bool complement) {
    if (scores.empty()) return 0.0;
    double acc = 0.0;
    for (double s : scores) {
        if (!std::isfinite(s)) throw InvalidInput("adv_loss: scores must be finite");
        const double p = std::clamp(s, kScoreEpsilon, 1.0 - kScoreEpsilon);
        acc += std::log(complement ? 1.0 - p : p);
    }
    return acc / static_cast<double>(scores.size());
}

}  // namespace

void LossWeights::validate() const {
    for (double w : {rec, con, adv}) {
        if (!std::isfinite(w) || w < 0.0) throw InvalidInput("loss weights must be finite and >= 0");
    }
}

double rms_distance(const LinearImage& a, const LinearImage& b) {
    require_same_size(a, b, "rms_distance");
    const auto da = a.data();
    const auto db = b.data();
    if (da.empty()) throw InvalidInput("rms_distance: empty image");
    double acc = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) acc += (da[i] - db[i]) * (da[i] - db[i]);
    return std::sqrt(acc / static_cast<double>(da.size()));
}

double rms_distance(const Rgb& a, const Rgb& b) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(acc / 3.0);
}

double rec_loss(std::span<const SupervisedSample> samples) {
    if (samples.empty()) throw InvalidInput("rec_loss: sample list is empty");
    double total = 0.0;
    for (const SupervisedSample& s : samples) {
        total += rms_distance(s.clear_true, s.clear_pred);
        total += rms_distance(s.backscatter_true, s.backscatter_pred);
        total += rms_distance(s.transmission_true, s.transmission_pred);
        total += rms_distance(s.white_true, s.white_pred);
        total += 1.0 - ssim(s.clear_true, s.clear_pred);
    }
    return total;
}

double con_loss(const LinearImage& clear_pred_1, const LinearImage& clear_pred_2,
                std::span<const LinearImage> originals, std::span<const LinearImage> regenerated) {
    if (originals.size() != regenerated.size()) {
        throw InvalidInput("con_loss: " + std::to_string(originals.size()) + " originals but " +
                           std::to_string(regenerated.size()) + " regenerated images");
    }
    double total = rms_distance(clear_pred_1, clear_pred_2);
    for (std::size_t i = 0; i < originals.size(); ++i) {
        total += rms_distance(originals[i], regenerated[i]);
    }
    return total;
}

double adv_loss(std::span<const double> fake_inter_scores, std::span<const double> fake_intra_scores,
                std::span<const double> real_scores) {
    return mean_log(fake_inter_scores, true) + mean_log(fake_intra_scores, true) +
           mean_log(real_scores, false);
}

double total_loss(double rec, double con, double adv, const LossWeights& weights) {
    weights.validate();
    if (!std::isfinite(rec) || !std::isfinite(con) || !std::isfinite(adv)) {
        throw InvalidInput("total_loss: loss terms must be finite");
    }
    return weights.rec * rec + weights.con * con + weights.adv * adv;
}

}  // namespace uwimf
