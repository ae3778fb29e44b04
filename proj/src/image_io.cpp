#include "lzeval/image_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lzeval {

namespace {

// Reads one whitespace-delimited PNM header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c)) {
                tok.push_back(static_cast<char>(in.get()));
            }
            return tok;
        }
    }
    throw IoError("unexpected end of PNM header");
}

int parse_int(const std::string& tok, const char* what) {
    try {
        size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError(std::string("bad PNM header field: ") + what);
    }
}

void require_single_whitespace(std::istream& in) {
    int c = in.get();
    if (c == EOF || !std::isspace(c)) throw IoError("malformed PNM header");
}

}  // namespace

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic = next_token(in);
    if (magic != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
    int w = parse_int(next_token(in), "width");
    int h = parse_int(next_token(in), "height");
    int maxval = parse_int(next_token(in), "maxval");
    if (maxval != 255) {
        throw IoError(path.string() + ": unsupported PGM maxval (must be 255)");
    }
    if (w <= 0 || h <= 0) throw IoError(path.string() + ": bad PGM dimensions");
    require_single_whitespace(in);
    std::vector<unsigned char> raw(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
        throw IoError(path.string() + ": truncated PGM data");
    }
    std::vector<float> px(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) px[i] = raw[i] / 255.0f;
    return GrayImage(w, h, std::move(px));
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        float v = img.data[i];
        v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

void save_ppm(const ColorImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    static_assert(sizeof(Rgb) == 3);
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size() * 3));
    if (!out) throw IoError("failed writing " + path.string());
}

ColorImage load_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic = next_token(in);
    if (magic != "P6") throw IoError(path.string() + ": not a binary PPM (P6)");
    int w = parse_int(next_token(in), "width");
    int h = parse_int(next_token(in), "height");
    int maxval = parse_int(next_token(in), "maxval");
    if (maxval != 255) throw IoError(path.string() + ": unsupported PPM maxval");
    if (w <= 0 || h <= 0) throw IoError(path.string() + ": bad PPM dimensions");
    require_single_whitespace(in);
    ColorImage img(w, h);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size() * 3));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size() * 3)) {
        throw IoError(path.string() + ": truncated PPM data");
    }
    return img;
}

namespace {

float byteswap_f32(float v) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    u = ((u & 0x000000FFu) << 24) | ((u & 0x0000FF00u) << 8) |
        ((u & 0x00FF0000u) >> 8) | ((u & 0xFF000000u) >> 24);
    std::memcpy(&v, &u, 4);
    return v;
}

constexpr bool kHostLittle = std::endian::native == std::endian::little;

}  // namespace

FloatRaster load_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic = next_token(in);
    if (magic != "Pf") throw IoError(path.string() + ": not a grayscale PFM (Pf)");
    int w = parse_int(next_token(in), "width");
    int h = parse_int(next_token(in), "height");
    double scale;
    try {
        scale = std::stod(next_token(in));
    } catch (const std::exception&) {
        throw IoError(path.string() + ": bad PFM scale");
    }
    if (scale >= 0.0) {
        throw IoError(path.string() + ": big-endian PFM not supported (scale must be negative)");
    }
    if (w <= 0 || h <= 0) throw IoError(path.string() + ": bad PFM dimensions");
    require_single_whitespace(in);
    FloatRaster raster;
    raster.width = w;
    raster.height = h;
    raster.data.resize(static_cast<size_t>(w) * h);
    // Rows stored bottom-up.
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(raster.data.data() + static_cast<size_t>(y) * w),
                static_cast<std::streamsize>(w) * 4);
        if (in.gcount() != static_cast<std::streamsize>(w) * 4) {
            throw IoError(path.string() + ": truncated PFM data");
        }
    }
    if constexpr (!kHostLittle) {
        for (float& v : raster.data) v = byteswap_f32(v);
    }
    return raster;
}

void save_pfm(const FloatRaster& raster, const std::filesystem::path& path) {
    if (raster.width <= 0 || raster.height <= 0 ||
        raster.data.size() != static_cast<size_t>(raster.width) * raster.height) {
        throw InputError("inconsistent raster dimensions");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "Pf\n" << raster.width << " " << raster.height << "\n-1.0\n";
    std::vector<float> row(raster.width);
    for (int y = raster.height - 1; y >= 0; --y) {
        const float* src = raster.data.data() + static_cast<size_t>(y) * raster.width;
        if constexpr (kHostLittle) {
            out.write(reinterpret_cast<const char*>(src),
                      static_cast<std::streamsize>(raster.width) * 4);
        } else {
            for (int x = 0; x < raster.width; ++x) row[x] = byteswap_f32(src[x]);
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(raster.width) * 4);
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lzeval
