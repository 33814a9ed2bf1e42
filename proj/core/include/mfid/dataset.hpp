#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfid/gray_image.hpp"

namespace mfid {

/// Square chip geometry. Chips are anchored at multiples of `stride` along
/// each axis; the trailing margin narrower than `chip_size` is discarded.
struct ChipSpec {
    std::size_t chip_size = 128;
    std::size_t stride = 64;

    /// Throws InvalidArgument unless 1 <= stride <= chip_size <= min(width, height).
    void validate_for(std::size_t width, std::size_t height) const;

    friend bool operator==(const ChipSpec&, const ChipSpec&) = default;
};

/// Top-left corner of a chip in source-image pixels.
struct ChipAnchor {
    std::size_t x = 0;
    std::size_t y = 0;

    friend bool operator==(const ChipAnchor&, const ChipAnchor&) = default;
};

/// Number of chip anchors along one axis of length `extent`.
std::size_t chips_along(std::size_t extent, const ChipSpec& spec);

/// (floor((W - c) / s) + 1) * (floor((H - c) / s) + 1).
std::size_t chip_count(std::size_t width, std::size_t height, const ChipSpec& spec);

/// Anchors in row-major order (y outer, x inner).
std::vector<ChipAnchor> chip_anchors(std::size_t width, std::size_t height, const ChipSpec& spec);

/// Copies the chip at `anchor` out of `image`.
GrayImage crop_chip(const GrayImage& image, ChipAnchor anchor, std::size_t chip_size);

/// All chips of `image`, in the order given by chip_anchors().
std::vector<GrayImage> extract_chips(const GrayImage& image, const ChipSpec& spec);

/// Ordered condition bin. The numeric order low < mid < hi is meaningful.
enum class BinLabel { low = 0, mid = 1, hi = 2 };

std::string_view to_string(BinLabel label) noexcept;
/// Parses "low" / "mid" / "hi"; throws InvalidArgument otherwise.
BinLabel parse_bin_label(std::string_view text);

/// Tertile thresholds for one scalar condition. Intervals are right-closed:
/// low is (-inf, lower], mid is (lower, upper], hi is (upper, +inf).
struct ConditionBinning {
    std::string condition_name;
    double lower_threshold = 0.0;
    double upper_threshold = 0.0;

    BinLabel label(double value) const noexcept;
};

/// Fits tertile thresholds as the nearest-rank 1/3 and 2/3 quantiles of
/// `values` (the ceil(n/3)-th and ceil(2n/3)-th smallest).
///
/// Throws InvalidArgument with fewer than three values or a non-finite value,
/// and DegenerateData when every value is identical.
ConditionBinning fit_tertile_binning(std::span<const double> values,
                                     std::string condition_name);

}  // namespace mfid
