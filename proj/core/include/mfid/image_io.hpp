#pragma once

#include <filesystem>
#include <optional>

#include "mfid/gray_image.hpp"

namespace mfid {

/// Source sample depth of a raster file.
enum class BitDepth { eight = 8, sixteen = 16 };

/// Loads a single-channel PNG or binary PGM (P5) and divides each sample by
/// 2^depth - 1. The format is chosen from the file signature, not the
/// extension. When `expected` is set, a file with a different depth is an
/// error.
///
/// Throws IoError for unreadable or undecodable files, multi-channel input,
/// or an unsupported depth.
GrayImage load_image(const std::filesystem::path& path,
                     std::optional<BitDepth> expected = std::nullopt);

/// Writes a grayscale PNG, quantizing intensities to the given depth with
/// round-to-nearest.
void save_png(const GrayImage& image, const std::filesystem::path& path,
              BitDepth depth = BitDepth::sixteen);

/// Writes a binary PGM (P5), maxval 255 or 65535.
void save_pgm(const GrayImage& image, const std::filesystem::path& path,
              BitDepth depth = BitDepth::eight);

}  // namespace mfid
