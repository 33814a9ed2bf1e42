#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfid/gray_image.hpp"
#include "mfid/persim.hpp"

namespace mfid {

/// Principal axes of a corpus of flattened persistence images.
struct PCAModel {
    std::vector<double> mean;
    /// k orthonormal rows, each the length of `mean`. Each row's
    /// largest-magnitude entry is positive.
    std::vector<std::vector<double>> components;
    /// Sample variance (n - 1 denominator) along each component, descending.
    std::vector<double> explained_variance;
    /// Components whose variance is numerically zero relative to the first.
    std::size_t degenerate_components = 0;

    std::size_t dimension() const noexcept { return mean.size(); }
    std::size_t rank() const noexcept { return components.size(); }

    friend bool operator==(const PCAModel&, const PCAModel&) = default;
};

struct PcaOptions {
    std::size_t components = 3;
    /// Return a model with zero variances for a zero-spread corpus instead of
    /// throwing DegenerateData.
    bool allow_degenerate = false;
};

/// Exact PCA of the mean-centered sample covariance via a dense symmetric
/// eigendecomposition. Rows must share one length; at least
/// max(2, options.components) rows are required.
PCAModel pca_fit(std::span<const std::vector<double>> rows, const PcaOptions& options = {});

/// PCA over persistence images sharing one grid spec.
PCAModel pca_fit(std::span<const PersistenceImage> pis, const PcaOptions& options = {});

/// components * (x - mean). Throws InvalidArgument on a length mismatch.
std::vector<double> pca_project(const PCAModel& model, std::span<const double> x);
std::vector<double> pca_project(const PCAModel& model, const PersistenceImage& pi);

std::string pca_model_to_json(const PCAModel& model);
PCAModel pca_model_from_json(std::string_view text);
void save_pca_model(const PCAModel& model, const std::filesystem::path& path);
PCAModel load_pca_model(const std::filesystem::path& path);

/// Euclidean distance between two persistence images with the same spec.
double pi_distance(const PersistenceImage& a, const PersistenceImage& b);

/// How a condition's corpus is brought to a shared [0, 1] scale.
enum class NormalizationMode {
    /// Shift each image so its mean equals the pooled corpus mean, then map
    /// the corpus min and max to 0 and 1.
    per_image_centering,
    /// Only the corpus-wide min-max map; image means are left as they are.
    corpus_minmax,
};

std::string_view to_string(NormalizationMode mode) noexcept;
NormalizationMode parse_normalization_mode(std::string_view text);

struct NormalizationResult {
    std::vector<GrayImage> images;
    NormalizationMode mode = NormalizationMode::per_image_centering;
    /// Corpus extrema after centering, before scaling.
    double corpus_min = 0.0;
    double corpus_max = 0.0;
    /// Pixels that rounding pushed outside [0, 1] and were clamped.
    std::size_t clamped = 0;
};

/// Throws InvalidArgument on an empty corpus and DegenerateData when the
/// centered corpus has no intensity spread.
NormalizationResult normalize_condition(std::span<const GrayImage> images,
                                        NormalizationMode mode = NormalizationMode::per_image_centering);

/// Share of pixels at or above each threshold.
struct AreaFractionCurve {
    std::vector<double> thresholds;
    std::vector<double> fractions;

    friend bool operator==(const AreaFractionCurve&, const AreaFractionCurve&) = default;
};

/// {0, 1/(n-1), ..., 1}; n >= 2.
std::vector<double> evenly_spaced_thresholds(std::size_t n = 10);

AreaFractionCurve area_fraction_curve(const GrayImage& image,
                                      std::span<const double> thresholds);
/// Uses the ten default thresholds.
AreaFractionCurve area_fraction_curve(const GrayImage& image);

/// `k` distinct indices drawn uniformly from [0, n) by a partial
/// Fisher-Yates shuffle, returned in ascending order. k is capped at n.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::uint64_t seed);

/// Mean curve over min(sample_size, corpus size) images drawn without
/// replacement with the seeded generator.
AreaFractionCurve mean_area_fraction(std::span<const GrayImage> corpus,
                                     std::size_t sample_size, std::uint64_t seed);

/// Entrywise mean of curves sharing thresholds.
AreaFractionCurve average_curves(std::span<const AreaFractionCurve> curves);

/// max_j |a.fractions[j] - b.fractions[j]|.
double max_abs_gap(const AreaFractionCurve& a, const AreaFractionCurve& b);

/// CSV `threshold,mean_fraction`, one row per threshold.
void write_area_fraction_csv(const AreaFractionCurve& curve, std::ostream& out);

}  // namespace mfid
