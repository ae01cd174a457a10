#pragma once

#include <span>
#include <vector>

#include "uwimf/image.hpp"

namespace uwimf {

/// Weights of the combined training objective.
struct LossWeights {
    double rec = 10.0;
    double con = 1.0;
    double adv = 2.0;

    void validate() const;
};

/// Predicted and ground-truth components of one synthetic sample.
struct SupervisedSample {
    LinearImage clear_pred;
    LinearImage clear_true;
    LinearImage backscatter_pred;
    LinearImage backscatter_true;
    LinearImage transmission_pred;
    LinearImage transmission_true;
    Rgb white_pred{1.0, 1.0, 1.0};
    Rgb white_true{1.0, 1.0, 1.0};
};

/// Pixel-count-normalized L2 distance, sqrt(mean((a - b)^2)).
double rms_distance(const LinearImage& a, const LinearImage& b);
double rms_distance(const Rgb& a, const Rgb& b);

/// Sum over samples of rms(J) + rms(B) + rms(T) + rms(W) + (1 - SSIM(J, J_pred)).
double rec_loss(std::span<const SupervisedSample> samples);

/// rms(J1 - J2) + sum_i rms(I_i - I_i regenerated).
double con_loss(const LinearImage& clear_pred_1, const LinearImage& clear_pred_2,
                std::span<const LinearImage> originals, std::span<const LinearImage> regenerated);

/// Scores are clamped to [kScoreEpsilon, 1 - kScoreEpsilon] before taking natural logs.
inline constexpr double kScoreEpsilon = 1e-7;

/// mean ln(1 - fake_inter) + mean ln(1 - fake_intra) + mean ln(real); empty lists add 0.
double adv_loss(std::span<const double> fake_inter_scores, std::span<const double> fake_intra_scores,
                std::span<const double> real_scores);

double total_loss(double rec, double con, double adv, const LossWeights& weights = {});

}  // namespace uwimf
