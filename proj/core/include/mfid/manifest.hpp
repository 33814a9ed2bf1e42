#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfid/dataset.hpp"

namespace mfid {

enum class Temper { t5, t6, as_extruded };
enum class Origin { experimental, synthetic };

std::string_view to_string(Temper t) noexcept;
std::string_view to_string(Origin o) noexcept;
/// Accepts "T5", "T6", "as_extruded".
Temper parse_temper(std::string_view text);
/// Accepts "experimental", "synthetic".
Origin parse_origin(std::string_view text);

/// One row of a corpus manifest.
struct ManifestEntry {
    std::string path;
    Temper temper = Temper::t5;
    Origin origin = Origin::experimental;
    std::string condition_name;
    std::optional<double> condition_value;
    std::optional<BinLabel> bin_label;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Index of images with their temper, conditioning and bin bookkeeping.
struct CorpusManifest {
    std::vector<ManifestEntry> entries;

    /// Throws InvalidArgument if an as-extruded entry carries a UTS value.
    void validate() const;

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

inline constexpr std::string_view kManifestHeader =
    "path,temper,origin,condition_name,condition_value,bin_label";

/// UTF-8 CSV with the fixed header above; an empty field means absent.
CorpusManifest read_manifest_csv(std::istream& in);
void write_manifest_csv(const CorpusManifest& manifest, std::ostream& out);

/// JSON mirror: an array of objects (or {"entries": [...]}) with the CSV
/// field names; null or a missing key means absent.
CorpusManifest read_manifest_json(std::istream& in);
void write_manifest_json(const CorpusManifest& manifest, std::ostream& out);

/// Dispatches on extension: ".json" reads JSON, anything else CSV. Validates.
CorpusManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

/// Resolves an entry path against the directory holding the manifest.
std::filesystem::path resolve_entry_path(const ManifestEntry& entry,
                                         const std::filesystem::path& manifest_path);

struct LabelingResult {
    CorpusManifest manifest;
    std::size_t labeled = 0;
    /// Entries without a value for the binned condition (e.g. as-extruded
    /// tubes under UTS binning). Their bin_label is left untouched.
    std::size_t skipped = 0;
};

/// Applies `binning` to every entry that carries a value for its condition.
/// Entries whose condition_name is empty or matches are eligible; an entry
/// holding a value under a different condition name is an error.
LabelingResult assign_labels(const CorpusManifest& manifest, const ConditionBinning& binning);

/// True when every labeled entry of `binning`'s condition agrees with it.
bool labels_consistent(const CorpusManifest& manifest, const ConditionBinning& binning);

/// Values recorded under `condition_name`, in manifest order.
std::vector<double> condition_values(const CorpusManifest& manifest,
                                     std::string_view condition_name);

}  // namespace mfid
