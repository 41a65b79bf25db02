#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "sonosim/error.hpp"
#include "sonosim/image.hpp"
#include "sonosim/random.hpp"

namespace sonosim {

// Network tensor sizes: images are resized to the output size, then mirror
// padded to the input size.
inline constexpr std::size_t net_output_size = 388;
inline constexpr std::size_t net_mirror_pad = 92;
inline constexpr std::size_t net_input_size = net_output_size + 2 * net_mirror_pad;  // 572

/// Per-pixel (background, foreground) probabilities.
using ProbMap = Image<std::array<double, 2>>;

enum class NormalizeMode { min_max, divide_255 };

struct AugmentConfig {
    double max_shift_fraction = 0.10;
    double zoom_min = 0.9;
    double zoom_max = 1.1;

    void validate() const {
        if (!(max_shift_fraction >= 0.0 && max_shift_fraction < 0.5))
            throw InvalidConfig("AugmentConfig: max_shift_fraction must lie in [0, 0.5)");
        if (!(zoom_min > 0.0) || zoom_max < zoom_min) throw InvalidConfig("AugmentConfig: zoom range must be positive");
    }
};

/// One draw of the augmentation: output pixel p samples the input at
/// center + (p - center - shift) / zoom.
struct AugmentTransform {
    double shift_rows = 0.0;
    double shift_cols = 0.0;
    double zoom = 1.0;
};

struct NetInputPair {
    RealImage image;  // net_input_size^2, values in [0, 1]
    MaskImage mask;   // net_output_size^2, values in {0, 1}; empty when unlabeled
};

namespace detail {

// Reflection without repeating the border sample: -1 -> 1, n -> n - 2.
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    i %= period;
    if (i < 0) i += period;
    if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
    return static_cast<std::size_t>(i);
}

inline double reflect_coord(double x, std::size_t n) {
    if (n == 1) return 0.0;
    const double period = 2.0 * static_cast<double>(n - 1);
    x = std::fmod(x, period);
    if (x < 0.0) x += period;
    if (x > static_cast<double>(n - 1)) x = period - x;
    return x;
}

inline double bilinear_at(const RealImage& img, double r, double c) {
    const auto r0 = static_cast<std::size_t>(std::floor(r));
    const auto c0 = static_cast<std::size_t>(std::floor(c));
    const std::size_t r1 = std::min(r0 + 1, img.height() - 1);
    const std::size_t c1 = std::min(c0 + 1, img.width() - 1);
    const double fr = r - static_cast<double>(r0);
    const double fc = c - static_cast<double>(c0);
    const double top = fc == 0.0 ? img(r0, c0) : (1.0 - fc) * img(r0, c0) + fc * img(r0, c1);
    if (fr == 0.0) return top;
    const double bottom = fc == 0.0 ? img(r1, c0) : (1.0 - fc) * img(r1, c0) + fc * img(r1, c1);
    return (1.0 - fr) * top + fr * bottom;
}

// Corner-aligned source coordinate of output index i.
inline double corner_aligned(std::size_t i, std::size_t in_n, std::size_t out_n) {
    if (out_n == 1 || in_n == 1) return 0.0;
    const double scale = static_cast<double>(in_n - 1) / static_cast<double>(out_n - 1);
    return std::min(static_cast<double>(i) * scale, static_cast<double>(in_n - 1));
}

}  // namespace detail

inline RealImage resize_bilinear(const RealImage& img, std::size_t out_h, std::size_t out_w) {
    if (img.empty()) throw EmptyInput("resize_bilinear: empty input image");
    if (out_h == 0 || out_w == 0) throw EmptyInput("resize_bilinear: empty output shape");
    RealImage out(out_h, out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
        const double sr = detail::corner_aligned(r, img.height(), out_h);
        for (std::size_t c = 0; c < out_w; ++c)
            out(r, c) = detail::bilinear_at(img, sr, detail::corner_aligned(c, img.width(), out_w));
    }
    return out;
}

/// Corner-aligned nearest-neighbour resize; used for label masks.
template <typename T>
Image<T> resize_nearest(const Image<T>& img, std::size_t out_h, std::size_t out_w) {
    if (img.empty()) throw EmptyInput("resize_nearest: empty input image");
    if (out_h == 0 || out_w == 0) throw EmptyInput("resize_nearest: empty output shape");
    Image<T> out(out_h, out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
        const auto sr = static_cast<std::size_t>(std::lround(detail::corner_aligned(r, img.height(), out_h)));
        for (std::size_t c = 0; c < out_w; ++c)
            out(r, c) = img(sr, static_cast<std::size_t>(std::lround(detail::corner_aligned(c, img.width(), out_w))));
    }
    return out;
}

template <typename T>
Image<T> mirror_pad(const Image<T>& img, std::size_t pad) {
    if (img.empty()) throw EmptyInput("mirror_pad: empty input image");
    if (pad >= std::min(img.height(), img.width()))
        throw PadTooLarge("mirror_pad: pad " + std::to_string(pad) + " must be smaller than both image dimensions");
    const auto p = static_cast<std::ptrdiff_t>(pad);
    Image<T> out(img.height() + 2 * pad, img.width() + 2 * pad);
    for (std::size_t r = 0; r < out.height(); ++r) {
        const std::size_t sr = detail::reflect_index(static_cast<std::ptrdiff_t>(r) - p, img.height());
        for (std::size_t c = 0; c < out.width(); ++c)
            out(r, c) = img(sr, detail::reflect_index(static_cast<std::ptrdiff_t>(c) - p, img.width()));
    }
    return out;
}

template <typename T>
std::vector<T> mirror_pad(std::span<const T> v, std::size_t pad) {
    if (v.empty()) throw EmptyInput("mirror_pad: empty input");
    if (pad >= v.size()) throw PadTooLarge("mirror_pad: pad must be smaller than the input length");
    std::vector<T> out(v.size() + 2 * pad);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = v[detail::reflect_index(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(pad), v.size())];
    return out;
}

template <typename T>
Image<T> center_crop(const Image<T>& img, std::size_t h, std::size_t w) {
    if (h > img.height() || w > img.width()) throw ShapeMismatch("center_crop: crop larger than image");
    const std::size_t r0 = (img.height() - h) / 2;
    const std::size_t c0 = (img.width() - w) / 2;
    Image<T> out(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) out(r, c) = img(r0 + r, c0 + c);
    return out;
}

/// Min-max to [0, 1]; a constant image maps to zeros. `divide_255` instead
/// scales 8-bit intensities by 1/255.
inline RealImage normalize01(const RealImage& img, NormalizeMode mode = NormalizeMode::min_max) {
    RealImage out(img.height(), img.width(), 0.0);
    auto src = img.pixels();
    auto dst = out.pixels();
    if (mode == NormalizeMode::divide_255) {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp(src[i] / 255.0, 0.0, 1.0);
        return out;
    }
    if (src.empty()) return out;
    const auto [lo, hi] = std::minmax_element(src.begin(), src.end());
    const double mn = *lo;
    const double range = *hi - mn;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - mn) / range;
    return out;
}

/// Resize to 388x388, mirror pad by 92 to 572x572, normalize to [0, 1].
inline RealImage preprocess_image(const RealImage& img, NormalizeMode mode = NormalizeMode::min_max) {
    return normalize01(mirror_pad(resize_bilinear(img, net_output_size, net_output_size), net_mirror_pad), mode);
}

/// Nearest-neighbour resize of a label mask to the 388x388 network output, binarized.
inline MaskImage preprocess_mask(const MaskImage& mask) {
    MaskImage out = resize_nearest(mask, net_output_size, net_output_size);
    for (auto& v : out.pixels()) v = v != 0 ? 1 : 0;
    return out;
}

inline NetInputPair preprocess_pair(const RealImage& img, const MaskImage& mask,
                                    NormalizeMode mode = NormalizeMode::min_max) {
    return {preprocess_image(img, mode), mask.empty() ? MaskImage{} : preprocess_mask(mask)};
}

inline AugmentTransform draw_augment(Rng& rng, const AugmentConfig& cfg, std::size_t height, std::size_t width) {
    cfg.validate();
    AugmentTransform t;
    const double max_dy = cfg.max_shift_fraction * static_cast<double>(height);
    const double max_dx = cfg.max_shift_fraction * static_cast<double>(width);
    t.shift_rows = uniform(rng, -max_dy, max_dy);
    t.shift_cols = uniform(rng, -max_dx, max_dx);
    t.zoom = cfg.zoom_min == cfg.zoom_max ? cfg.zoom_min : uniform(rng, cfg.zoom_min, cfg.zoom_max);
    return t;
}

/// Same geometric transform on both: image bilinear with reflect fill, mask
/// nearest-neighbour with zero fill.
inline std::pair<RealImage, MaskImage> apply_augment(const RealImage& image, const MaskImage& mask,
                                                     const AugmentTransform& t) {
    require_same_shape(image, mask, "augment");
    const std::size_t h = image.height();
    const std::size_t w = image.width();
    const double cy = 0.5 * static_cast<double>(h - 1);
    const double cx = 0.5 * static_cast<double>(w - 1);
    RealImage out_img(h, w);
    MaskImage out_mask(h, w, 0);
    for (std::size_t r = 0; r < h; ++r) {
        const double sr = cy + (static_cast<double>(r) - cy - t.shift_rows) / t.zoom;
        const double nr = std::round(sr);
        for (std::size_t c = 0; c < w; ++c) {
            const double sc = cx + (static_cast<double>(c) - cx - t.shift_cols) / t.zoom;
            out_img(r, c) = detail::bilinear_at(image, detail::reflect_coord(sr, h), detail::reflect_coord(sc, w));
            const double nc = std::round(sc);
            if (nr >= 0.0 && nc >= 0.0 && nr <= static_cast<double>(h - 1) && nc <= static_cast<double>(w - 1))
                out_mask(r, c) = mask(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
        }
    }
    return {std::move(out_img), std::move(out_mask)};
}

inline std::pair<RealImage, MaskImage> augment(const RealImage& image, const MaskImage& mask, Rng& rng,
                                               const AugmentConfig& cfg = {}) {
    require_same_shape(image, mask, "augment");
    return apply_augment(image, mask, draw_augment(rng, cfg, image.height(), image.width()));
}

/// Foreground iff its probability strictly exceeds background.
inline MaskImage binarize_argmax(const ProbMap& prob) {
    MaskImage out(prob.height(), prob.width(), 0);
    auto src = prob.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i][1] > src[i][0] ? 1 : 0;
    return out;
}

/// 2|G n P| / (|G| + |P|) over nonzero pixels; 1 when both are empty.
inline double dice(const MaskImage& truth, const MaskImage& pred) {
    require_same_shape(truth, pred, "dice");
    std::size_t inter = 0, g = 0, p = 0;
    auto a = truth.pixels();
    auto b = pred.pixels();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool in_g = a[i] != 0;
        const bool in_p = b[i] != 0;
        g += in_g;
        p += in_p;
        inter += in_g && in_p;
    }
    if (g + p == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(g + p);
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population
};

inline MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

/// "m ± s" with two decimals.
inline std::string format_mean_std(const MeanStd& ms) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", ms.mean, ms.std);
    return buf;
}

inline constexpr double soft_dice_epsilon = 1.0;

inline double soft_dice_loss(const RealImage& prob_fg, const MaskImage& truth) {
    require_same_shape(prob_fg, truth, "soft_dice_loss");
    double sp = 0.0, sg = 0.0, spg = 0.0;
    auto p = prob_fg.pixels();
    auto g = truth.pixels();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] != 0 ? 1.0 : 0.0;
        sp += p[i];
        sg += gi;
        spg += p[i] * gi;
    }
    return 1.0 - (2.0 * spg + soft_dice_epsilon) / (sp + sg + soft_dice_epsilon);
}

/// d(soft_dice_loss)/d(prob_fg).
inline RealImage soft_dice_loss_gradient(const RealImage& prob_fg, const MaskImage& truth) {
    require_same_shape(prob_fg, truth, "soft_dice_loss_gradient");
    double sp = 0.0, sg = 0.0, spg = 0.0;
    auto p = prob_fg.pixels();
    auto g = truth.pixels();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] != 0 ? 1.0 : 0.0;
        sp += p[i];
        sg += gi;
        spg += p[i] * gi;
    }
    const double num = 2.0 * spg + soft_dice_epsilon;
    const double den = sp + sg + soft_dice_epsilon;
    RealImage grad(prob_fg.height(), prob_fg.width());
    auto d = grad.pixels();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] != 0 ? 1.0 : 0.0;
        d[i] = -(2.0 * gi * den - num) / (den * den);
    }
    return grad;
}

}  // namespace sonosim
