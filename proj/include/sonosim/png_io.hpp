#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <png.h>

#include "sonosim/error.hpp"
#include "sonosim/image.hpp"

namespace sonosim::png {

/// 8-bit pixels as stored: 1 channel (gray) or 3 channels (RGB, interleaved).
struct Pixels {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;
    std::vector<std::uint8_t> data;
};

/// Reads any PNG, reduced to 8 bits per channel. Palette and color images come
/// back as RGB, gray images as one channel; alpha is composited onto black.
inline Pixels read(const std::filesystem::path& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.string().c_str()))
        throw IoError("cannot read PNG " + path.string() + ": " + img.message);
    const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    Pixels px;
    px.height = img.height;
    px.width = img.width;
    px.channels = color ? 3 : 1;
    px.data.resize(PNG_IMAGE_SIZE(img));
    png_color black{0, 0, 0};
    if (!png_image_finish_read(&img, &black, px.data.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return px;
}

inline void write_gray(const std::filesystem::path& path, std::size_t height, std::size_t width,
                       std::span<const std::uint8_t> data) {
    if (data.size() != height * width) throw ShapeMismatch("png::write_gray: buffer size does not match shape");
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(width);
    img.height = static_cast<png_uint_32>(height);
    img.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&img, path.string().c_str(), 0, data.data(), 0, nullptr))
        throw IoError("cannot write PNG " + path.string() + ": " + img.message);
}

inline void write_rgb(const std::filesystem::path& path, std::size_t height, std::size_t width,
                      std::span<const std::uint8_t> data) {
    if (data.size() != 3 * height * width) throw ShapeMismatch("png::write_rgb: buffer size does not match shape");
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(width);
    img.height = static_cast<png_uint_32>(height);
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.string().c_str(), 0, data.data(), 0, nullptr))
        throw IoError("cannot write PNG " + path.string() + ": " + img.message);
}

/// Rec. 601 luma; gray input passes through.
inline Image<std::uint8_t> to_gray(const Pixels& px) {
    Image<std::uint8_t> out(px.height, px.width);
    auto dst = out.pixels();
    if (px.channels == 1) {
        std::copy(px.data.begin(), px.data.end(), dst.begin());
        return out;
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double y = 0.299 * px.data[3 * i] + 0.587 * px.data[3 * i + 1] + 0.114 * px.data[3 * i + 2];
        dst[i] = static_cast<std::uint8_t>(std::lround(std::clamp(y, 0.0, 255.0)));
    }
    return out;
}

inline RealImage to_real(const Image<std::uint8_t>& img) {
    RealImage out(img.height(), img.width());
    auto s = img.pixels();
    auto d = out.pixels();
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i];
    return out;
}

/// [0, 1] -> round(255 v).
inline Image<std::uint8_t> quantize(const RealImage& img) {
    Image<std::uint8_t> out(img.height(), img.width());
    auto s = img.pixels();
    auto d = out.pixels();
    for (std::size_t i = 0; i < s.size(); ++i)
        d[i] = static_cast<std::uint8_t>(std::lround(std::clamp(s[i], 0.0, 1.0) * 255.0));
    return out;
}

inline void write_image(const std::filesystem::path& path, const RealImage& img) {
    const auto q = quantize(img);
    write_gray(path, q.height(), q.width(), q.pixels());
}

/// Masks go to disk as {0, 255}.
inline void write_mask(const std::filesystem::path& path, const MaskImage& mask) {
    Image<std::uint8_t> out(mask.height(), mask.width());
    auto s = mask.pixels();
    auto d = out.pixels();
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] != 0 ? 255 : 0;
    write_gray(path, out.height(), out.width(), out.pixels());
}

/// Any nonzero gray value is foreground.
inline MaskImage read_mask(const std::filesystem::path& path) {
    auto gray = to_gray(read(path));
    for (auto& v : gray.pixels()) v = v != 0 ? 1 : 0;
    return gray;
}

inline RealImage read_image(const std::filesystem::path& path) { return to_real(to_gray(read(path))); }

}  // namespace sonosim::png
