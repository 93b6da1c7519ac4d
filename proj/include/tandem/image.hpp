#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tandem/errors.hpp"

namespace tandem {

/// 8-bit camera frame, row-major, channel-interleaved (1 or 3 channels).
struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    RawImage() = default;
    RawImage(int w, int h, int c = 1)
        : width(w), height(h), channels(c),
          pixels(static_cast<std::size_t>(w) * h * c, 0) {}

    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

/// Downscaled, grayscale, patch-normalized image. Values are real,
/// roughly zero-mean / unit-variance per patch. Immutable by convention
/// once produced by preprocess().
struct ProcessedImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    ProcessedImage() = default;
    ProcessedImage(int w, int h)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0.0) {}

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

namespace detail {

// Grayscale via unweighted channel mean, as doubles.
inline std::vector<double> to_gray(const RawImage& img) {
    std::vector<double> gray(static_cast<std::size_t>(img.width) * img.height);
    if (img.channels == 1) {
        for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = img.pixels[i];
        return gray;
    }
    for (std::size_t i = 0; i < gray.size(); ++i) {
        double sum = 0.0;
        for (int c = 0; c < img.channels; ++c) sum += img.pixels[i * img.channels + c];
        gray[i] = sum / img.channels;
    }
    return gray;
}

// Exact box (area) average onto the target grid. Each target pixel covers
// the source rectangle [tx*sw/tw, (tx+1)*sw/tw) x [ty*sh/th, (ty+1)*sh/th)
// and averages with fractional edge coverage. Requires target <= source.
inline std::vector<double> box_downscale(const std::vector<double>& src, int sw, int sh,
                                         int tw, int th) {
    if (tw == sw && th == sh) return src;
    std::vector<double> dst(static_cast<std::size_t>(tw) * th, 0.0);
    const double sx = static_cast<double>(sw) / tw;
    const double sy = static_cast<double>(sh) / th;
    for (int ty = 0; ty < th; ++ty) {
        const double y0 = ty * sy, y1 = (ty + 1) * sy;
        const int iy0 = static_cast<int>(std::floor(y0));
        const int iy1 = std::min(sh, static_cast<int>(std::ceil(y1)));
        for (int tx = 0; tx < tw; ++tx) {
            const double x0 = tx * sx, x1 = (tx + 1) * sx;
            const int ix0 = static_cast<int>(std::floor(x0));
            const int ix1 = std::min(sw, static_cast<int>(std::ceil(x1)));
            double acc = 0.0, area = 0.0;
            for (int y = iy0; y < iy1; ++y) {
                const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
                for (int x = ix0; x < ix1; ++x) {
                    const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
                    acc += src[static_cast<std::size_t>(y) * sw + x] * wx * wy;
                    area += wx * wy;
                }
            }
            dst[static_cast<std::size_t>(ty) * tw + tx] = acc / area;
        }
    }
    return dst;
}

// Per-block standardization over non-overlapping patch x patch blocks
// anchored at (0,0); edge blocks are truncated. Population std, floored
// at 1e-6 so uniform blocks map to all zeros.
inline void patch_normalize(std::vector<double>& img, int w, int h, int patch) {
    for (int by = 0; by < h; by += patch) {
        const int y1 = std::min(h, by + patch);
        for (int bx = 0; bx < w; bx += patch) {
            const int x1 = std::min(w, bx + patch);
            const int n = (y1 - by) * (x1 - bx);
            double sum = 0.0;
            for (int y = by; y < y1; ++y)
                for (int x = bx; x < x1; ++x) sum += img[static_cast<std::size_t>(y) * w + x];
            const double mean = sum / n;
            double var = 0.0;
            for (int y = by; y < y1; ++y)
                for (int x = bx; x < x1; ++x) {
                    const double d = img[static_cast<std::size_t>(y) * w + x] - mean;
                    var += d * d;
                }
            const double stddev = std::max(std::sqrt(var / n), 1e-6);
            for (int y = by; y < y1; ++y)
                for (int x = bx; x < x1; ++x) {
                    double& v = img[static_cast<std::size_t>(y) * w + x];
                    v = (v - mean) / stddev;
                }
        }
    }
}

}  // namespace detail

/// Grayscale -> box downscale -> patch normalization.
/// Throws InvalidDimensions for zero targets or upscaling requests.
inline ProcessedImage preprocess(const RawImage& img, int target_width, int target_height,
                                 int patch_size) {
    if (target_width < 1 || target_height < 1 || patch_size < 1 ||
        target_width > img.width || target_height > img.height) {
        throw InvalidDimensions("preprocess: bad target " + std::to_string(target_width) +
                                "x" + std::to_string(target_height) + " for source " +
                                std::to_string(img.width) + "x" + std::to_string(img.height));
    }
    std::vector<double> gray = detail::to_gray(img);
    std::vector<double> small =
        detail::box_downscale(gray, img.width, img.height, target_width, target_height);
    detail::patch_normalize(small, target_width, target_height, patch_size);
    ProcessedImage out(target_width, target_height);
    out.pixels = std::move(small);
    return out;
}

/// Binary PGM (P5), maxval 255. Only single-channel images are stored.
inline void write_pgm(const RawImage& img, const std::filesystem::path& path) {
    if (img.channels != 1) throw IoError("write_pgm: only 1-channel images: " + path.string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write_pgm: write failed " + path.string());
}

inline RawImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingImage("read_pgm: cannot open " + path.string());

    auto next_token = [&in, &path]() -> std::string {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {  // comment runs to end of line
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw FormatError("read_pgm: truncated header " + path.string());
    };

    if (next_token() != "P5") throw FormatError("read_pgm: not a P5 file " + path.string());
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw FormatError("read_pgm: bad header " + path.string());
    }
    if (w < 1 || h < 1 || maxval != 255)
        throw FormatError("read_pgm: unsupported header " + path.string());
    in.get();  // single whitespace after maxval
    RawImage img(w, h, 1);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw FormatError("read_pgm: truncated pixel data " + path.string());
    return img;
}

}  // namespace tandem
