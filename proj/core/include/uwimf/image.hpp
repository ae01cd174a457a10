#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "uwimf/error.hpp"

namespace uwimf {

using Rgb = std::array<double, 3>;

/// Interleaved floating-point raster with a fixed channel count.
///
/// The tag parameter keeps semantically different rasters (radiance images,
/// range maps, scalar planes) from being mixed up by accident. Samples are
/// addressed as (x, y, channel); storage is row-major, channel-interleaved.
template <int Channels, typename Tag>
class Raster {
public:
    static constexpr int channels = Channels;

    Raster() = default;

    Raster(int width, int height, double fill = 0.0) : width_(width), height_(height) {
        if (width < 1 || height < 1) {
            throw InvalidInput("raster dimensions must be positive, got " + std::to_string(width) +
                               "x" + std::to_string(height));
        }
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * Channels,
                     fill);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
    double operator()(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

    /// Sample c of pixel p, where p is the row-major pixel index.
    double& at(std::size_t p, int c = 0) noexcept { return data_[p * Channels + c]; }
    double at(std::size_t p, int c = 0) const noexcept { return data_[p * Channels + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    template <int C2, typename T2>
    bool same_size(const Raster<C2, T2>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    bool all_finite() const noexcept {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * Channels + static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

struct LinearImageTag;
struct GrayImageTag;
struct RangeMapTag;

/// H x W x 3 linear-RGB radiance, nominal display range [0, 1].
using LinearImage = Raster<3, LinearImageTag>;
/// Single-channel scalar plane (luminance, subbands, masks).
using GrayImage = Raster<1, GrayImageTag>;
/// Camera-to-object range in meters.
using RangeMap = Raster<1, RangeMapTag>;

/// Throws InvalidInput unless the image is non-empty and every sample is finite.
void validate(const LinearImage& img, const char* what = "image");
/// Throws InvalidInput unless the range map is non-empty, finite and non-negative.
void validate(const RangeMap& z, const char* what = "range map");
/// Throws InvalidInput when the two rasters differ in size.
template <int C1, typename T1, int C2, typename T2>
void require_same_size(const Raster<C1, T1>& a, const Raster<C2, T2>& b, const char* context) {
    if (!a.same_size(b)) {
        throw InvalidInput(std::string(context) + ": dimension mismatch (" +
                           std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                           std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
    }
}

/// Per-pixel clamp of every sample to [lo, hi].
LinearImage clamped(const LinearImage& img, double lo = 0.0, double hi = 1.0);

/// Mean of each channel.
Rgb channel_means(const LinearImage& img);

/// Single channel of an image as a scalar plane.
GrayImage extract_channel(const LinearImage& img, int channel);

}  // namespace uwimf
