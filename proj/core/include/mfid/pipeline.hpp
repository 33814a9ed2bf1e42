#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfid/analytics.hpp"
#include "mfid/dataset.hpp"
#include "mfid/manifest.hpp"
#include "mfid/persim.hpp"

namespace mfid {

/// Selects the groups compared for one condition. An empty temper list means
/// every temper that appears with this condition in either manifest.
struct ConditionSelector {
    std::string condition_name;
    std::vector<Temper> tempers;
};

struct PipelineConfig {
    std::filesystem::path experimental_manifest;
    std::filesystem::path synthetic_manifest;
    ChipSpec chip_spec;
    PIGridSpec pi_spec;
    /// Empty: every condition name found in either manifest.
    std::vector<ConditionSelector> conditions;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "fidelity_report";
    NormalizationMode normalization_mode = NormalizationMode::per_image_centering;
    std::size_t workers = 1;
    std::size_t area_sample_size = 1000;
    std::size_t pca_components = 3;
};

/// Parses the JSON mirror of PipelineConfig. Relative manifest paths are
/// resolved against `base_dir`; missing keys keep their defaults.
PipelineConfig pipeline_config_from_json(const std::string& text,
                                         const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string pipeline_config_to_json(const PipelineConfig& config);

/// One chip's coordinates in the experimental PCA space.
struct ProjectionRow {
    std::string chip_id;
    Origin origin = Origin::experimental;  ///< which corpus the chip came from
    Temper temper = Temper::t5;
    std::optional<BinLabel> bin_label;
    std::vector<double> coordinates;
};

/// CSV `chip_id,origin,temper,bin_label,pc1,pc2,pc3`; missing components
/// are left empty.
void write_projection_csv(const std::vector<ProjectionRow>& rows, std::ostream& out);

struct GroupReport {
    std::string id;
    Temper temper = Temper::t5;
    std::string condition_name;
    std::size_t experimental_images = 0;
    std::size_t synthetic_images = 0;
    std::size_t experimental_chips = 0;
    std::size_t synthetic_chips = 0;
    PersistenceImage average_experimental;
    PersistenceImage average_synthetic;
    double pi_distance = 0.0;
    /// Fitted on the experimental corpus only.
    PCAModel pca;
    std::vector<ProjectionRow> projections;
    AreaFractionCurve area_experimental;
    AreaFractionCurve area_synthetic;
    double max_area_fraction_gap = 0.0;
    std::size_t clamped_experimental = 0;
    std::size_t clamped_synthetic = 0;
    /// Output files, relative to the output directory.
    std::vector<std::string> artifacts;
};

struct SkippedGroup {
    std::string id;
    Temper temper = Temper::t5;
    std::string condition_name;
    std::string reason;
};

struct FidelityReport {
    static constexpr int kSchemaVersion = 1;
    PipelineConfig config;
    std::vector<GroupReport> groups;
    std::vector<SkippedGroup> skipped;
};

/// Chip -> persistence -> PI for every entry of each group, then averages,
/// an experimental-only PCA with both corpora projected, and mean area
/// fractions over a seeded chip sample (normalized per condition). Writes
/// report.json, CSV/JSON artifacts and SVG plots to config.output_dir.
///
/// Groups present in only one manifest are skipped and listed. Other errors
/// are rethrown as Error with the group id prefixed.
FidelityReport run_pipeline(const PipelineConfig& config);

/// 0 when every group ran, 1 when any group was skipped or none exist.
int exit_status(const FidelityReport& report);

std::string report_to_json(const FidelityReport& report);

/// Per group: PI heatmap pair, three pairwise PCA scatter panels and the
/// area-fraction chart, as SVG. Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const FidelityReport& report,
                                              const std::filesystem::path& output_dir);

}  // namespace mfid
