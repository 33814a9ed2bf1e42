#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mfid::detail {

// Entrywise mean of `count` equally sized vectors fetched through `row(i)`.
//
// The first vector is the pivot; deviations from it are combined by pairwise
// summation in a fixed tree order and the mean deviation is added back. The
// result is reproducible bit for bit, and a set of identical vectors returns
// the pivot unchanged.
template <typename RowFn>
std::vector<double> shifted_mean(std::size_t count, std::size_t length, RowFn&& row) {
    const auto& pivot = row(std::size_t{0});
    std::vector<double> out(pivot.begin(), pivot.end());
    if (count <= 1) return out;

    std::function<std::vector<double>(std::size_t, std::size_t)> sum_range =
        [&](std::size_t lo, std::size_t hi) -> std::vector<double> {
        if (hi - lo == 1) {
            const auto& r = row(lo);
            std::vector<double> d(length);
            for (std::size_t k = 0; k < length; ++k) d[k] = r[k] - pivot[k];
            return d;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        auto left = sum_range(lo, mid);
        const auto right = sum_range(mid, hi);
        for (std::size_t k = 0; k < length; ++k) left[k] += right[k];
        return left;
    };

    const auto deviation = sum_range(1, count);
    const double n = static_cast<double>(count);
    for (std::size_t k = 0; k < length; ++k) out[k] = pivot[k] + deviation[k] / n;
    return out;
}

}  // namespace mfid::detail
