#include "lzeval/image.hpp"

#include <algorithm>
#include <cmath>

namespace lzeval {

GrayImage::GrayImage(int w, int h, float fill) {
    if (w <= 0 || h <= 0) throw InputError("image dimensions must be positive");
    if (!(fill >= 0.0f && fill <= 1.0f)) throw InputError("intensity outside [0, 1]");
    width = w;
    height = h;
    data.assign(static_cast<size_t>(w) * h, fill);
}

GrayImage::GrayImage(int w, int h, std::vector<float> values) {
    if (w <= 0 || h <= 0) throw InputError("image dimensions must be positive");
    if (values.size() != static_cast<size_t>(w) * h) {
        throw InputError("pixel buffer size does not match dimensions");
    }
    for (float v : values) {
        if (!(v >= 0.0f && v <= 1.0f)) throw InputError("intensity outside [0, 1]");
    }
    width = w;
    height = h;
    data = std::move(values);
}

double sample_bilinear(const GrayImage& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double fx = x - x0;
    double fy = y - y0;
    double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
    double bot = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
    return (1.0 - fy) * top + fy * bot;
}

GrayImage flip_horizontal(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            out.at(x, y) = img.at(img.width - 1 - x, y);
        }
    }
    return out;
}

ColorImage::ColorImage(int w, int h, Rgb fill) {
    if (w <= 0 || h <= 0) throw InputError("image dimensions must be positive");
    width = w;
    height = h;
    data.assign(static_cast<size_t>(w) * h, fill);
}

}  // namespace lzeval
