#pragma once

#include <filesystem>

#include "uwimf/image.hpp"

namespace uwimf {

/// Reads an 8/16-bit PNG (gray, gray+alpha, RGB or RGBA) or a binary PPM (P6, maxval <= 65535).
/// Samples are scaled to [0, 1]; with `assume_srgb` the sRGB transfer function is inverted.
/// Alpha is discarded; gray inputs are replicated to three channels.
LinearImage load_image(const std::filesystem::path& path, bool assume_srgb = true);

/// Writes a PNG or PPM chosen by extension. Samples are clamped to [0, 1] first.
/// `bit_depth` is 8 or 16.
void save_image(const LinearImage& img, const std::filesystem::path& path, bool encode_srgb = true,
                int bit_depth = 16);

/// Reads a single-channel PFM ("Pf", meters) or a single-channel 8/16-bit PNG
/// (integer value times `scale` meters).
RangeMap load_range(const std::filesystem::path& path, double scale = 0.001);

/// Writes a little-endian single-channel PFM.
void save_range(const RangeMap& z, const std::filesystem::path& path);

}  // namespace uwimf
