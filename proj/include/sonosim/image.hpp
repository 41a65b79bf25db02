#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sonosim/error.hpp"

namespace sonosim {

/// Dense row-major 2D array. Row index is the axial (vertical) direction.
template <typename T>
class Image {
public:
    using value_type = T;

    Image() = default;
    Image(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), data_(height * width, fill) {}

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }
    std::span<T> row(std::size_t r) { return std::span<T>(data_).subspan(r * width_, width_); }
    std::span<const T> row(std::size_t r) const {
        return std::span<const T>(data_).subspan(r * width_, width_);
    }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }
    template <typename U>
    bool same_shape(const Image<U>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Image& a, const Image& b) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> data_;
};

using RealImage = Image<double>;
using MaskImage = Image<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(const Image<A>& a, const Image<B>& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw ShapeMismatch(std::string(what) + ": shapes " + std::to_string(a.height()) + "x" +
                            std::to_string(a.width()) + " and " + std::to_string(b.height()) + "x" +
                            std::to_string(b.width()) + " differ");
    }
}

/// Pixel lattice in phantom coordinates (mm). Pixel (r, c) has its center at
/// (lateral = origin_lateral + c * lateral_spacing, depth = origin_axial + r * axial_spacing).
struct ImageGrid {
    std::size_t height = 512;
    std::size_t width = 340;
    double axial_spacing = 60.0 / 512.0;
    double lateral_spacing = 40.0 / 340.0;
    double origin_axial = 30.0 + 0.5 * (60.0 / 512.0);
    double origin_lateral = -20.0 + 0.5 * (40.0 / 340.0);

    double depth_of(std::size_t r) const { return origin_axial + static_cast<double>(r) * axial_spacing; }
    double lateral_of(std::size_t c) const {
        return origin_lateral + static_cast<double>(c) * lateral_spacing;
    }

    void validate() const {
        if (height == 0 || width == 0) throw InvalidConfig("ImageGrid: height and width must be positive");
        if (!(axial_spacing > 0.0) || !(lateral_spacing > 0.0))
            throw InvalidConfig("ImageGrid: spacings must be > 0");
    }

    /// Grid whose pixel centers tile an axial x lateral rectangle starting at
    /// (depth0, lateral0).
    static ImageGrid covering(double depth0, double axial_extent, double lateral0, double lateral_extent,
                              std::size_t height, std::size_t width) {
        ImageGrid g;
        g.height = height;
        g.width = width;
        g.axial_spacing = axial_extent / static_cast<double>(height);
        g.lateral_spacing = lateral_extent / static_cast<double>(width);
        g.origin_axial = depth0 + 0.5 * g.axial_spacing;
        g.origin_lateral = lateral0 + 0.5 * g.lateral_spacing;
        return g;
    }

    friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

}  // namespace sonosim
