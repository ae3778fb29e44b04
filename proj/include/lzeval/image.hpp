#pragma once

#include <cstdint>
#include <vector>

#include "lzeval/error.hpp"

namespace lzeval {

/// Single-channel raster with row-major float intensities in [0, 1].
/// Treated as immutable once filled: operations take const references and
/// return new images.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 0.0f);
    /// Validating constructor: throws InputError unless values has w*h
    /// entries all inside [0, 1].
    GrayImage(int w, int h, std::vector<float> values);

    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    bool same_size(const GrayImage& o) const {
        return width == o.width && height == o.height;
    }
    bool operator==(const GrayImage& o) const = default;
};

/// Bilinear sample with border replication; coordinates clamped to the frame.
double sample_bilinear(const GrayImage& img, double x, double y);

/// Horizontal mirror (used to derive right-referenced disparity maps).
GrayImage flip_horizontal(const GrayImage& img);

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB raster for overlays.
struct ColorImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> data;

    ColorImage() = default;
    ColorImage(int w, int h, Rgb fill = {});

    Rgb at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    Rgb& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    bool operator==(const ColorImage& o) const = default;
};

}  // namespace lzeval
