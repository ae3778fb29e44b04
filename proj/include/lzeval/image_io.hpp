#pragma once

#include <filesystem>
#include <vector>

#include "lzeval/image.hpp"

namespace lzeval {

/// Binary PGM (P5). Only maxval 255 is accepted; other maxvals are rejected.
GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Binary PPM (P6), 8-bit.
void save_ppm(const ColorImage& img, const std::filesystem::path& path);
ColorImage load_ppm(const std::filesystem::path& path);

/// Grayscale PFM ("Pf"): 32-bit IEEE-754 floats, little-endian (scale -1.0),
/// rows stored bottom-up. +infinity encodes an invalid sample.
struct FloatRaster {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // row-major, top-down in memory
};

FloatRaster load_pfm(const std::filesystem::path& path);
void save_pfm(const FloatRaster& raster, const std::filesystem::path& path);

}  // namespace lzeval
