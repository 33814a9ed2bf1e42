#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mfid/cubical.hpp"

namespace mfid {

/// How a point's Gaussian is turned into a bin value.
enum class KernelEvaluation {
    /// Exact integral of the Gaussian over the bin (closed form via erf).
    bin_integral,
    /// Gaussian density at the bin center times the bin area.
    bin_center,
};

/// Weighting of a point by its persistence p. Only the linear ramp
/// w(p) = p / persistence_max is supported.
enum class PersistenceWeight { linear };

/// Persistence-image grid in (birth, persistence) coordinates.
struct PIGridSpec {
    std::size_t bins_x = 10;  ///< birth axis
    std::size_t bins_y = 10;  ///< persistence axis
    double birth_min = 0.0;
    double birth_max = 1.0;
    double persistence_min = 0.0;
    double persistence_max = 1.0;
    double sigma = 0.05;
    PersistenceWeight weight = PersistenceWeight::linear;
    KernelEvaluation evaluation = KernelEvaluation::bin_integral;

    /// Throws InvalidArgument on empty grids, degenerate ranges or sigma <= 0.
    void validate() const;

    double bin_width() const noexcept { return (birth_max - birth_min) / static_cast<double>(bins_x); }
    double bin_height() const noexcept {
        return (persistence_max - persistence_min) / static_cast<double>(bins_y);
    }
    double weight_of(double persistence) const noexcept { return persistence / persistence_max; }

    friend bool operator==(const PIGridSpec&, const PIGridSpec&) = default;
};

/// bins_y x bins_x grid, row 0 holding the lowest persistence and column 0
/// the earliest birth.
class PersistenceImage {
public:
    PersistenceImage() = default;
    /// All-zero image.
    explicit PersistenceImage(const PIGridSpec& spec);
    /// Takes row-major values; throws on a size mismatch or negative entry.
    PersistenceImage(const PIGridSpec& spec, std::vector<double> values);

    const PIGridSpec& spec() const noexcept { return spec_; }
    std::size_t rows() const noexcept { return spec_.bins_y; }
    std::size_t cols() const noexcept { return spec_.bins_x; }

    double operator()(std::size_t row, std::size_t col) const noexcept {
        return values_[row * spec_.bins_x + col];
    }
    double& at(std::size_t row, std::size_t col) noexcept { return values_[row * spec_.bins_x + col]; }

    /// Row-major flattening, length bins_x * bins_y.
    std::span<const double> values() const noexcept { return values_; }

    double total_mass() const noexcept;

    friend bool operator==(const PersistenceImage&, const PersistenceImage&) = default;

private:
    PIGridSpec spec_;
    std::vector<double> values_;
};

/// Kernel-smoothed, persistence-weighted image of `diagram`. Each point
/// (b, d) sits at (b, d - b) and contributes w(d - b) times an isotropic
/// Gaussian of width sigma; points outside the ranges still contribute
/// through their tails.
PersistenceImage vectorize(const PersistenceDiagram& diagram, const PIGridSpec& spec);

/// Entrywise arithmetic mean. Throws InvalidArgument on an empty list or
/// mismatched specs.
PersistenceImage average_pis(std::span<const PersistenceImage> pis);

/// CSV of bins_y rows by bins_x columns, row 0 first (lowest persistence).
void write_pi_csv(const PersistenceImage& pi, std::ostream& out);
std::vector<double> read_pi_csv(std::istream& in, std::size_t& rows, std::size_t& cols);

/// JSON encoding of a grid spec, used as the sidecar next to PI CSVs.
std::string pi_spec_to_json(const PIGridSpec& spec);
PIGridSpec pi_spec_from_json(const std::string& text);

/// Writes `<stem>.pi.csv` and `<stem>.pi.json` under `dir`; returns the CSV path.
std::filesystem::path save_pi(const PersistenceImage& pi, const std::filesystem::path& dir,
                              const std::string& stem);
/// Loads a PI CSV and its `.json` sidecar (same stem). Without a sidecar the
/// default spec is assumed and checked against the CSV shape.
PersistenceImage load_pi(const std::filesystem::path& csv_path);

}  // namespace mfid
