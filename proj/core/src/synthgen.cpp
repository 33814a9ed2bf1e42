#include "mfid/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfid/error.hpp"
#include "mfid/parallel.hpp"
#include "mfid/random.hpp"

namespace mfid {

namespace {

double distance(double ax, double ay, double bx, double by) {
    return std::hypot(ax - bx, ay - by);
}

// Pixel bounding box of a blob footprint, clipped to the image.
struct Box {
    std::size_t x0, x1, y0, y1;  // inclusive
};

Box footprint_box(const Blob& b, std::size_t width, std::size_t height) {
    auto lo = [](double v) { return static_cast<std::size_t>(std::max(0.0, std::ceil(v))); };
    auto hi = [](double v, std::size_t n) {
        return static_cast<std::size_t>(std::min(static_cast<double>(n - 1), std::floor(v)));
    };
    return {lo(b.center_x - b.radius), hi(b.center_x + b.radius, width),
            lo(b.center_y - b.radius), hi(b.center_y + b.radius, height)};
}

double profile_value(const Blob& b, double background, double d) {
    if (b.profile == BlobProfile::plateau) {
        if (d <= b.radius - 1.0) return b.peak;
        return background + 0.5 * (b.peak - background);
    }
    const double s = b.radius / 2.0;
    return background + (b.peak - background) * std::exp(-0.5 * (d * d) / (s * s));
}

}  // namespace

std::string_view to_string(Preset p) noexcept {
    switch (p) {
        case Preset::t5_like: return "t5_like";
        case Preset::t6_like: return "t6_like";
        case Preset::custom: return "custom";
    }
    return "?";
}

Preset parse_preset(std::string_view text) {
    if (text == "t5_like") return Preset::t5_like;
    if (text == "t6_like") return Preset::t6_like;
    if (text == "custom") return Preset::custom;
    throw InvalidArgument("unknown preset '" + std::string(text) + "'");
}

void MicrostructureSpec::validate() const {
    if (width == 0 || height == 0) throw InvalidArgument("microstructure image must be at least 1x1");
    if (!(background_level >= 0.0 && background_level <= 1.0)) {
        throw InvalidArgument("background level outside [0, 1]");
    }
    if (!(noise_amplitude >= 0.0 && noise_amplitude <= 1.0)) {
        throw InvalidArgument("noise amplitude outside [0, 1]");
    }
    const double max_x = static_cast<double>(width - 1);
    const double max_y = static_cast<double>(height - 1);
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        const Blob& b = blobs[i];
        const std::string tag = "blob " + std::to_string(i);
        if (!(b.radius >= 1.0)) throw InvalidArgument(tag + ": radius must be at least 1");
        if (!(b.peak > background_level && b.peak <= 1.0)) {
            throw InvalidArgument(tag + ": peak must lie in (background, 1]");
        }
        if (b.center_x - b.radius < 0.0 || b.center_x + b.radius > max_x ||
            b.center_y - b.radius < 0.0 || b.center_y + b.radius > max_y) {
            throw InvalidArgument(tag + " extends outside the image");
        }
        if (b.profile == BlobProfile::plateau &&
            distance(std::round(b.center_x), std::round(b.center_y), b.center_x, b.center_y) >
                b.radius - 1.0) {
            throw InvalidArgument(tag + ": plateau covers no pixel");
        }
        for (std::size_t j = 0; j < i; ++j) {
            const Blob& o = blobs[j];
            if (!(distance(b.center_x, b.center_y, o.center_x, o.center_y) > b.radius + o.radius + 2.0)) {
                throw InvalidArgument(tag + " overlaps blob " + std::to_string(j));
            }
        }
    }
}

GrayImage generate(const MicrostructureSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t w = spec.width;
    const std::size_t h = spec.height;
    std::vector<double> px(w * h, spec.background_level);

    for (const Blob& b : spec.blobs) {
        const Box box = footprint_box(b, w, h);
        for (std::size_t y = box.y0; y <= box.y1; ++y) {
            for (std::size_t x = box.x0; x <= box.x1; ++x) {
                const double d = distance(static_cast<double>(x), static_cast<double>(y), b.center_x, b.center_y);
                if (d <= b.radius) px[y * w + x] = profile_value(b, spec.background_level, d);
            }
        }
    }

    if (spec.noise_amplitude > 0.0) {
        Rng rng(seed);
        for (double& v : px) {
            v = std::clamp(v + rng.uniform(-spec.noise_amplitude, spec.noise_amplitude), 0.0, 1.0);
        }
    }
    return GrayImage(w, h, std::move(px));
}

bool touches_border(const Blob& blob, std::size_t width, std::size_t height) {
    const Box box = footprint_box(blob, width, height);
    auto inside = [&](std::size_t x, std::size_t y) {
        return distance(static_cast<double>(x), static_cast<double>(y), blob.center_x, blob.center_y) <= blob.radius;
    };
    for (std::size_t y = box.y0; y <= box.y1; ++y) {
        for (std::size_t x = box.x0; x <= box.x1; ++x) {
            const bool border = x == 0 || y == 0 || x + 1 == width || y + 1 == height;
            if (border && inside(x, y)) return true;
        }
    }
    return false;
}

std::size_t expected_h1_count(const MicrostructureSpec& spec) {
    if (spec.noise_amplitude != 0.0) {
        throw InvalidArgument("expected H1 count is only defined for noise-free specs");
    }
    spec.validate();
    return static_cast<std::size_t>(std::count_if(spec.blobs.begin(), spec.blobs.end(), [&](const Blob& b) {
        return !touches_border(b, spec.width, spec.height);
    }));
}

namespace {

struct PresetParams {
    double background;
    double noise;
    std::size_t min_blobs;
    std::size_t max_blobs;  // per 128x128 area
    double min_radius;
    double max_radius;
    double min_peak;
    double max_peak;
    double gaussian_share;
};

PresetParams params_for(Preset p) {
    switch (p) {
        case Preset::t5_like: return {0.25, 0.03, 8, 14, 3.0, 8.0, 0.60, 0.95, 0.5};
        case Preset::t6_like: return {0.30, 0.12, 1, 3, 2.0, 4.0, 0.55, 0.80, 0.0};
        case Preset::custom: break;
    }
    throw InvalidArgument("the custom preset has no generator parameters");
}

}  // namespace

MicrostructureSpec preset_spec(Preset preset, std::size_t width, std::size_t height,
                               std::uint64_t seed) {
    const PresetParams prm = params_for(preset);
    MicrostructureSpec spec;
    spec.width = width;
    spec.height = height;
    spec.background_level = prm.background;
    spec.noise_amplitude = prm.noise;
    spec.preset = preset;

    Rng rng(seed);
    const double area_scale = static_cast<double>(width * height) / (128.0 * 128.0);
    const std::size_t lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(prm.min_blobs * area_scale)));
    const std::size_t hi = std::max(lo, static_cast<std::size_t>(std::lround(prm.max_blobs * area_scale)));
    const std::size_t target = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));

    constexpr int kAttemptsPerBlob = 200;
    for (std::size_t k = 0; k < target; ++k) {
        for (int attempt = 0; attempt < kAttemptsPerBlob; ++attempt) {
            Blob b;
            b.radius = rng.uniform(prm.min_radius, prm.max_radius);
            b.peak = rng.uniform(prm.min_peak, prm.max_peak);
            b.profile = rng.uniform01() < prm.gaussian_share ? BlobProfile::gaussian : BlobProfile::plateau;
            // Keep a one-pixel background ring inside the image.
            const double x_lo = b.radius + 1.0;
            const double x_hi = static_cast<double>(width) - 2.0 - b.radius;
            const double y_lo = b.radius + 1.0;
            const double y_hi = static_cast<double>(height) - 2.0 - b.radius;
            if (x_hi < x_lo || y_hi < y_lo) continue;
            b.center_x = std::round(rng.uniform(x_lo, x_hi));
            b.center_y = std::round(rng.uniform(y_lo, y_hi));
            if (b.center_x < x_lo || b.center_x > x_hi || b.center_y < y_lo || b.center_y > y_hi) continue;
            const bool clear = std::all_of(spec.blobs.begin(), spec.blobs.end(), [&](const Blob& o) {
                return distance(b.center_x, b.center_y, o.center_x, o.center_y) > b.radius + o.radius + 2.0;
            });
            if (clear) {
                spec.blobs.push_back(b);
                break;
            }
        }
    }
    spec.validate();
    return spec;
}

namespace {

GrayImage corpus_image(Preset preset, std::size_t index, std::size_t width, std::size_t height,
                       std::uint64_t seed) {
    const std::uint64_t s = stream_seed(seed, index);
    return generate(preset_spec(preset, width, height, s), mix_seed(s));
}

}  // namespace

std::vector<GrayImage> generate_corpus(Preset preset, std::size_t count, std::size_t width,
                                       std::size_t height, std::uint64_t seed) {
    std::vector<GrayImage> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(corpus_image(preset, i, width, height, seed));
    return out;
}

CorpusManifest write_corpus(const CorpusWriteOptions& o, const std::filesystem::path& dir) {
    if (o.preset == Preset::custom) throw InvalidArgument("the custom preset has no generator parameters");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

    const int digits = static_cast<int>(std::to_string(o.count > 0 ? o.count - 1 : 0).size());
    CorpusManifest manifest;
    manifest.entries.resize(o.count);
    parallel_for(o.count, o.workers, [&](std::size_t i) {
        std::string index = std::to_string(i);
        index.insert(0, static_cast<std::size_t>(std::max(0, digits - static_cast<int>(index.size()))), '0');
        const std::string name = o.file_prefix + "_" + index + ".png";
        save_png(corpus_image(o.preset, i, o.width, o.height, o.seed), dir / name, o.depth);
        ManifestEntry& e = manifest.entries[i];
        e.path = name;
        e.temper = o.temper;
        e.origin = o.origin;
        e.condition_name = o.condition_name.empty() ? std::string(to_string(o.preset)) : o.condition_name;
        e.condition_value = o.condition_value;
    });
    return manifest;
}

}  // namespace mfid
