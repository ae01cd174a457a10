#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "uwimf/image.hpp"

namespace uwimf {

inline constexpr int kHistogramBins = 8;
inline constexpr int kFeatureDims = 6 + 3 * kHistogramBins;

/// Orderless color statistics of one image: channel means (3), channel standard
/// deviations (3), then an 8-bin histogram over [0, 1] per channel (24), each summing to 1.
using FeatureVector = std::array<double, kFeatureDims>;

FeatureVector extract_features(const LinearImage& img);

struct Point2 {
    double u = 0.0;
    double v = 0.0;
};

struct Embedding2D {
    std::vector<Point2> points;
    std::string method = "pca";
};

/// Standardizes every feature dimension (population variance), drops constant ones and
/// projects onto the two leading principal components. Each component is oriented so
/// its largest-magnitude loading is positive. Identical inputs yield an all-zero
/// embedding. Throws InvalidInput for fewer than 3 vectors.
Embedding2D embed_2d(std::span<const FeatureVector> features);

/// Percentage of A's occupied cells that B also occupies, on a grid x grid raster of the
/// joint bounding box.
double intersection_ratio(const Embedding2D& a, const Embedding2D& b, int grid = 50);

/// Euclidean distance between the centroids of A and B.
double center_distance(const Embedding2D& a, const Embedding2D& b);

}  // namespace uwimf
