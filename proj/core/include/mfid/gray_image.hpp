#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfid {

/// Single-channel raster with intensities normalized to [0, 1], stored
/// row-major. Every constructor validates dimensions and range.
class GrayImage {
public:
    GrayImage() = default;

    /// Constant image.
    GrayImage(std::size_t width, std::size_t height, double value = 0.0);

    /// Takes ownership of `pixels`; size must equal width * height.
    GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }

    double operator()(std::size_t x, std::size_t y) const noexcept {
        return pixels_[y * width_ + x];
    }

    /// Writes one pixel; throws InvalidArgument when out of [0, 1].
    void set(std::size_t x, std::size_t y, double value);

    std::span<const double> pixels() const noexcept { return pixels_; }

    /// Mean of all pixels.
    double mean() const noexcept;

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> pixels_;
};

}  // namespace mfid
