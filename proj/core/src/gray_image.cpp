#include "mfid/gray_image.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mfid/error.hpp"

namespace mfid {

namespace {

void check_intensity(double v) {
    // NaN fails both comparisons.
    if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidArgument("pixel intensity " + std::to_string(v) + " outside [0, 1]");
    }
}

}  // namespace

GrayImage::GrayImage(std::size_t width, std::size_t height, double value)
    : width_(width), height_(height) {
    if (width == 0 || height == 0) {
        throw InvalidArgument("image dimensions must be at least 1x1");
    }
    check_intensity(value);
    pixels_.assign(width * height, value);
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width == 0 || height == 0) {
        throw InvalidArgument("image dimensions must be at least 1x1");
    }
    if (pixels_.size() != width * height) {
        throw InvalidArgument("pixel buffer has " + std::to_string(pixels_.size()) +
                              " entries, expected " + std::to_string(width * height));
    }
    for (double v : pixels_) check_intensity(v);
}

void GrayImage::set(std::size_t x, std::size_t y, double value) {
    check_intensity(value);
    pixels_[y * width_ + x] = value;
}

double GrayImage::mean() const noexcept {
    if (pixels_.empty()) return 0.0;
    return std::accumulate(pixels_.begin(), pixels_.end(), 0.0) /
           static_cast<double>(pixels_.size());
}

}  // namespace mfid
