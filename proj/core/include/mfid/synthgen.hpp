#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfid/gray_image.hpp"
#include "mfid/image_io.hpp"
#include "mfid/manifest.hpp"

namespace mfid {

enum class BlobProfile {
    /// Constant `peak` inside radius - 1, a one-pixel ring at the midpoint
    /// between background and peak, background beyond `radius`.
    plateau,
    /// Gaussian bump with standard deviation radius / 2, truncated at radius.
    gaussian,
};

enum class Preset {
    /// Many large precipitates on a quiet background.
    t5_like,
    /// Few small precipitates under a blanket of fine noise.
    t6_like,
    custom,
};

std::string_view to_string(Preset p) noexcept;
Preset parse_preset(std::string_view text);

struct Blob {
    double center_x = 0.0;  ///< pixel coordinates; pixel centers are integers
    double center_y = 0.0;
    double radius = 1.0;    ///< footprint: pixels within this distance of the center
    double peak = 1.0;
    BlobProfile profile = BlobProfile::plateau;
};

struct MicrostructureSpec {
    std::size_t width = 128;
    std::size_t height = 128;
    double background_level = 0.2;
    double noise_amplitude = 0.0;
    std::vector<Blob> blobs;
    Preset preset = Preset::custom;

    /// Throws InvalidArgument on overlapping blobs (center distance must
    /// exceed r1 + r2 + 2), blobs extending outside the image, a peak not
    /// above background, or a plateau blob too small to hold its peak.
    void validate() const;
};

/// Renders `spec`: background everywhere, blob profiles on top, then i.i.d.
/// uniform noise in [-noise_amplitude, +noise_amplitude] drawn in row-major
/// order from `seed`, clamped to [0, 1].
GrayImage generate(const MicrostructureSpec& spec, std::uint64_t seed);

/// Blobs whose footprint stays off the border pixels. In a noise-free image
/// each of them contributes one H1 class born at background_level. A blob
/// that touches the border still has a class, but its loop closes through
/// the blob's own outer pixels, so it is born above background and is not
/// counted here. Throws InvalidArgument when noise is set.
std::size_t expected_h1_count(const MicrostructureSpec& spec);

/// Whether any footprint pixel of `blob` lies on the image border.
bool touches_border(const Blob& blob, std::size_t width, std::size_t height);

/// Random spec for a preset regime, placed by seeded rejection sampling.
MicrostructureSpec preset_spec(Preset preset, std::size_t width, std::size_t height,
                               std::uint64_t seed);

/// `count` images of a preset; image i uses stream_seed(seed, i).
std::vector<GrayImage> generate_corpus(Preset preset, std::size_t count, std::size_t width,
                                       std::size_t height, std::uint64_t seed);

struct CorpusWriteOptions {
    Preset preset = Preset::t5_like;
    std::size_t count = 1;
    std::size_t width = 128;
    std::size_t height = 128;
    std::uint64_t seed = 0;
    Temper temper = Temper::t5;
    Origin origin = Origin::synthetic;
    /// Empty: the preset name.
    std::string condition_name;
    std::optional<double> condition_value;
    std::string file_prefix = "synth";
    BitDepth depth = BitDepth::sixteen;
    std::size_t workers = 1;
};

/// Writes generate_corpus() as PNG files `<prefix>_<index>.png` into `dir`
/// and returns a manifest whose paths are relative to `dir`.
CorpusManifest write_corpus(const CorpusWriteOptions& options, const std::filesystem::path& dir);

}  // namespace mfid
