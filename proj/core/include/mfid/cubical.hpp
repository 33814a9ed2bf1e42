#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "mfid/gray_image.hpp"

namespace mfid {

/// Cubical complex of a W x H image under the V-construction: pixels are
/// vertices, 4-neighbour pairs are edges and 2x2 pixel blocks are squares.
/// Each edge or square takes the maximum of its vertex intensities.
///
/// Cells are addressed on the doubled grid of size (2W-1) x (2H-1): cell
/// (c, r) is a vertex when both coordinates are even, a square when both are
/// odd and an edge otherwise. The cell index is r * (2W-1) + c.
///
/// The total order sorts by (value, dimension, index) ascending, which
/// refines the sublevel filtration and puts every face before its cofaces.
class CubicalFiltration {
public:
    struct Cell {
        std::uint8_t dimension = 0;
        double value = 0.0;
        /// Faces in index space; only the first `boundary_size` are valid.
        std::array<std::uint32_t, 4> boundary{};
        std::uint8_t boundary_size = 0;
    };

    explicit CubicalFiltration(const GrayImage& chip);

    std::size_t image_width() const noexcept { return width_; }
    std::size_t image_height() const noexcept { return height_; }
    std::size_t grid_width() const noexcept { return 2 * width_ - 1; }
    std::size_t grid_height() const noexcept { return 2 * height_ - 1; }

    std::size_t cell_count() const noexcept { return cells_.size(); }
    const Cell& cell(std::size_t index) const noexcept { return cells_[index]; }
    const std::vector<Cell>& cells() const noexcept { return cells_; }

    /// Cell indices in filtration order.
    const std::vector<std::uint32_t>& order() const noexcept { return order_; }

    /// Number of cells of dimension 0, 1 or 2.
    std::size_t count(int dimension) const noexcept;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Cell> cells_;
    std::vector<std::uint32_t> order_;
};

struct PersistencePair {
    double birth = 0.0;
    double death = 0.0;

    double persistence() const noexcept { return death - birth; }

    friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

/// Degree-1 persistence diagram. Points are finite with death > birth.
struct PersistenceDiagram {
    std::vector<PersistencePair> points;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }

    /// Sorts points lexicographically; diagrams compare as multisets after this.
    void canonicalize();

    friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

CubicalFiltration build_filtration(const GrayImage& chip);

/// H1 persistence of the sublevel filtration.
///
/// Runs union-find on the dual graph (squares plus one exterior node, joined
/// across edges) while walking the filtration backwards; each merge of two
/// dual components pairs the edge with the youngest square of the dying
/// component. Zero-persistence pairs are dropped. The output is canonicalized.
PersistenceDiagram compute_persistence(const CubicalFiltration& filtration);

/// Same result as compute_persistence(build_filtration(chip)), without
/// materializing the filtration: cells are ordered by a counting sort over
/// the dense ranks of the pixel values.
PersistenceDiagram compute_persistence(const GrayImage& chip);

/// Largest side accepted by brute_force_persistence.
inline constexpr std::size_t kBruteForceMaxSide = 32;

/// Reference H1 persistence by plain left-to-right Z/2 column reduction of
/// the full boundary matrix. Shares no code with the fast path. Throws
/// InvalidArgument when either side exceeds kBruteForceMaxSide.
PersistenceDiagram brute_force_persistence(const GrayImage& chip);

/// `birth,death` CSV with a header row.
void write_diagram_csv(const PersistenceDiagram& diagram, std::ostream& out);
PersistenceDiagram read_diagram_csv(std::istream& in);
void save_diagram(const PersistenceDiagram& diagram, const std::filesystem::path& path);
PersistenceDiagram load_diagram(const std::filesystem::path& path);

}  // namespace mfid
