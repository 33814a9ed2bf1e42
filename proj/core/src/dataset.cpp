#include "mfid/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "mfid/error.hpp"

namespace mfid {

void ChipSpec::validate_for(std::size_t width, std::size_t height) const {
    if (stride < 1) throw InvalidArgument("chip stride must be at least 1");
    if (stride > chip_size) {
        throw InvalidArgument("chip stride " + std::to_string(stride) + " exceeds chip size " +
                              std::to_string(chip_size));
    }
    if (chip_size > std::min(width, height)) {
        throw InvalidArgument("chip size " + std::to_string(chip_size) + " exceeds image " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
}

std::size_t chips_along(std::size_t extent, const ChipSpec& spec) {
    if (spec.stride == 0 || spec.chip_size > extent) return 0;
    return (extent - spec.chip_size) / spec.stride + 1;
}

std::size_t chip_count(std::size_t width, std::size_t height, const ChipSpec& spec) {
    spec.validate_for(width, height);
    return chips_along(width, spec) * chips_along(height, spec);
}

std::vector<ChipAnchor> chip_anchors(std::size_t width, std::size_t height,
                                     const ChipSpec& spec) {
    spec.validate_for(width, height);
    const std::size_t nx = chips_along(width, spec);
    const std::size_t ny = chips_along(height, spec);
    std::vector<ChipAnchor> anchors;
    anchors.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            anchors.push_back({i * spec.stride, j * spec.stride});
    return anchors;
}

GrayImage crop_chip(const GrayImage& image, ChipAnchor anchor, std::size_t chip_size) {
    if (chip_size == 0 || anchor.x + chip_size > image.width() ||
        anchor.y + chip_size > image.height()) {
        throw InvalidArgument("chip at (" + std::to_string(anchor.x) + ", " +
                              std::to_string(anchor.y) + ") does not fit in the image");
    }
    std::vector<double> px(chip_size * chip_size);
    const auto src = image.pixels();
    for (std::size_t row = 0; row < chip_size; ++row) {
        const auto begin = src.begin() + static_cast<std::ptrdiff_t>(
                                             (anchor.y + row) * image.width() + anchor.x);
        std::copy(begin, begin + static_cast<std::ptrdiff_t>(chip_size),
                  px.begin() + static_cast<std::ptrdiff_t>(row * chip_size));
    }
    return GrayImage(chip_size, chip_size, std::move(px));
}

std::vector<GrayImage> extract_chips(const GrayImage& image, const ChipSpec& spec) {
    if (image.empty()) throw InvalidArgument("cannot chip an empty image");
    std::vector<GrayImage> chips;
    for (const ChipAnchor& a : chip_anchors(image.width(), image.height(), spec)) {
        chips.push_back(crop_chip(image, a, spec.chip_size));
    }
    return chips;
}

std::string_view to_string(BinLabel label) noexcept {
    switch (label) {
        case BinLabel::low: return "low";
        case BinLabel::mid: return "mid";
        case BinLabel::hi: return "hi";
    }
    return "?";
}

BinLabel parse_bin_label(std::string_view text) {
    if (text == "low") return BinLabel::low;
    if (text == "mid") return BinLabel::mid;
    if (text == "hi") return BinLabel::hi;
    throw InvalidArgument("unknown bin label '" + std::string(text) + "'");
}

BinLabel ConditionBinning::label(double value) const noexcept {
    if (value <= lower_threshold) return BinLabel::low;
    if (value <= upper_threshold) return BinLabel::mid;
    return BinLabel::hi;
}

ConditionBinning fit_tertile_binning(std::span<const double> values,
                                     std::string condition_name) {
    if (values.size() < 3) {
        throw InvalidArgument("tertile binning needs at least 3 values, got " +
                              std::to_string(values.size()));
    }
    std::vector<double> sorted(values.begin(), values.end());
    for (double v : sorted) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite condition value");
    }
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
        throw DegenerateData("all " + std::to_string(sorted.size()) + " values of '" +
                             condition_name + "' are identical; tertiles are undefined");
    }
    const std::size_t n = sorted.size();
    // 1-based nearest ranks ceil(n/3) and ceil(2n/3).
    const std::size_t lower_rank = (n + 2) / 3;
    const std::size_t upper_rank = (2 * n + 2) / 3;
    return ConditionBinning{std::move(condition_name), sorted[lower_rank - 1],
                            sorted[upper_rank - 1]};
}

}  // namespace mfid
