#pragma once

#include <array>

#include "uwimf/image.hpp"

namespace uwimf {

/// One level of Haar analysis.
///
/// With a 2x2 block [[a, b], [c, d]] the bands are
///   LL = (a + b + c + d) / 2,   LH = (-a - b + c + d) / 2,
///   HL = (-a + b - c + d) / 2,  HH = (a - b - c + d) / 2.
/// The 4x4 analysis matrix is orthogonal, so synthesis uses the same kernels and
/// energy is preserved exactly. A constant plane c gives LL = 2c.
struct Subbands {
    GrayImage LL;
    GrayImage LH;
    GrayImage HL;
    GrayImage HH;
    int original_width = 0;
    int original_height = 0;
};

/// Odd dimensions are edge-replicated to even before analysis.
Subbands dwt2(const GrayImage& plane);

/// Exact inverse of dwt2, cropped back to the original size.
GrayImage idwt2(const Subbands& bands);

std::array<Subbands, 3> dwt2_rgb(const LinearImage& img);
LinearImage idwt2_rgb(const std::array<Subbands, 3>& bands);

}  // namespace uwimf
