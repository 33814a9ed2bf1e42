#pragma once

#include <cstddef>
#include <vector>

#include "mfid/gray_image.hpp"
#include "mfid/random.hpp"

namespace mfid::testing {

/// i.i.d. uniform [0, 1) pixels.
inline GrayImage random_chip(std::size_t w, std::size_t h, Rng& rng) {
    std::vector<double> px(w * h);
    for (double& v : px) v = rng.uniform01();
    return GrayImage(w, h, std::move(px));
}

/// Pixels drawn from {0, 1/(levels-1), ..., 1}; produces many exact ties.
inline GrayImage quantized_chip(std::size_t w, std::size_t h, std::size_t levels, Rng& rng) {
    std::vector<double> px(w * h);
    for (double& v : px) v = static_cast<double>(rng.below(levels)) / static_cast<double>(levels - 1);
    return GrayImage(w, h, std::move(px));
}

}  // namespace mfid::testing
