#pragma once

#include "uwimf/image.hpp"

namespace uwimf {

/// IEC 61966-2-1 sRGB decoding of one encoded value in [0, 1].
double srgb_to_linear(double encoded);
/// IEC 61966-2-1 sRGB encoding of one linear value in [0, 1].
double linear_to_srgb(double linear);

struct Lab {
    double L = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Linear sRGB (D65) to CIELAB, standard 2-degree observer.
/// Input is clamped to [0, 1]. The reference white is the XYZ image of RGB (1, 1, 1),
/// so every achromatic input maps to a* = b* = 0.
Lab rgb_to_lab(double r, double g, double b);

struct LabPlanes {
    GrayImage L;
    GrayImage a;
    GrayImage b;
};

LabPlanes to_lab(const LinearImage& img);

/// Rec. 601 luma weights applied to linear values.
GrayImage luminance(const LinearImage& img);

}  // namespace uwimf
