#include "mfid/cubical.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "mfid/error.hpp"

namespace mfid {

CubicalFiltration::CubicalFiltration(const GrayImage& chip)
    : width_(chip.width()), height_(chip.height()) {
    if (chip.empty()) throw InvalidArgument("cannot build a filtration of an empty chip");
    const std::size_t gw = grid_width();
    const std::size_t gh = grid_height();
    if (gw * gh > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("chip too large for 32-bit cell indices");
    }
    cells_.resize(gw * gh);

    auto at = [gw](std::size_t c, std::size_t r) { return static_cast<std::uint32_t>(r * gw + c); };

    for (std::size_t r = 0; r < gh; ++r) {
        for (std::size_t c = 0; c < gw; ++c) {
            Cell& cell = cells_[r * gw + c];
            const bool odd_c = c % 2 == 1;
            const bool odd_r = r % 2 == 1;
            if (!odd_c && !odd_r) {
                cell.dimension = 0;
                cell.value = chip(c / 2, r / 2);
            } else if (odd_c && !odd_r) {
                cell.dimension = 1;
                cell.value = std::max(chip(c / 2, r / 2), chip(c / 2 + 1, r / 2));
                cell.boundary = {at(c - 1, r), at(c + 1, r), 0, 0};
                cell.boundary_size = 2;
            } else if (!odd_c && odd_r) {
                cell.dimension = 1;
                cell.value = std::max(chip(c / 2, r / 2), chip(c / 2, r / 2 + 1));
                cell.boundary = {at(c, r - 1), at(c, r + 1), 0, 0};
                cell.boundary_size = 2;
            } else {
                cell.dimension = 2;
                const std::size_t x = c / 2;
                const std::size_t y = r / 2;
                cell.value = std::max({chip(x, y), chip(x + 1, y), chip(x, y + 1), chip(x + 1, y + 1)});
                cell.boundary = {at(c, r - 1), at(c - 1, r), at(c + 1, r), at(c, r + 1)};
                cell.boundary_size = 4;
            }
        }
    }

    order_.resize(cells_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    std::sort(order_.begin(), order_.end(), [this](std::uint32_t a, std::uint32_t b) {
        const Cell& ca = cells_[a];
        const Cell& cb = cells_[b];
        if (ca.value != cb.value) return ca.value < cb.value;
        if (ca.dimension != cb.dimension) return ca.dimension < cb.dimension;
        return a < b;
    });
}

std::size_t CubicalFiltration::count(int dimension) const noexcept {
    const std::size_t w = width_;
    const std::size_t h = height_;
    switch (dimension) {
        case 0: return w * h;
        case 1: return w * (h - 1) + h * (w - 1);
        case 2: return (w - 1) * (h - 1);
        default: return 0;
    }
}

void PersistenceDiagram::canonicalize() {
    std::sort(points.begin(), points.end());
}

CubicalFiltration build_filtration(const GrayImage& chip) {
    return CubicalFiltration(chip);
}

namespace {

// Union-find over dual vertices. Each root remembers the filtration position
// of the oldest square in its component, i.e. the one entering first when
// the filtration is walked backwards.
class DualForest {
public:
    static constexpr std::uint32_t kExteriorAge = std::numeric_limits<std::uint32_t>::max();

    explicit DualForest(std::size_t nodes) : parent_(nodes), size_(nodes, 1), oldest_(nodes, 0) {
        std::iota(parent_.begin(), parent_.end(), 0u);
    }

    void make(std::uint32_t node, std::uint32_t position) { oldest_[node] = position; }

    std::uint32_t find(std::uint32_t x) {
        std::uint32_t root = x;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[x] != root) {
            const std::uint32_t next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }

    std::uint32_t oldest(std::uint32_t root) const { return oldest_[root]; }

    void link(std::uint32_t a, std::uint32_t b) {
        const std::uint32_t keep = std::max(oldest_[a], oldest_[b]);
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        oldest_[a] = keep;
    }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
    std::vector<std::uint32_t> oldest_;
};

}  // namespace

PersistenceDiagram compute_persistence(const CubicalFiltration& filtration) {
    const auto& order = filtration.order();
    const std::size_t n = order.size();
    const std::size_t gw = filtration.grid_width();
    const std::size_t gh = filtration.grid_height();
    const auto exterior = static_cast<std::uint32_t>(n);

    DualForest forest(n + 1);
    forest.make(exterior, DualForest::kExteriorAge);

    PersistenceDiagram diagram;
    for (std::size_t pos = n; pos-- > 0;) {
        const std::uint32_t idx = order[pos];
        const auto& cell = filtration.cell(idx);
        if (cell.dimension == 2) {
            forest.make(idx, static_cast<std::uint32_t>(pos));
            continue;
        }
        if (cell.dimension == 0) continue;

        const std::size_t c = idx % gw;
        const std::size_t r = idx / gw;
        std::uint32_t side_a = exterior;
        std::uint32_t side_b = exterior;
        if (c % 2 == 1) {
            // Horizontal edge: squares above and below.
            if (r > 0) side_a = static_cast<std::uint32_t>(idx - gw);
            if (r + 1 < gh) side_b = static_cast<std::uint32_t>(idx + gw);
        } else {
            if (c > 0) side_a = idx - 1;
            if (c + 1 < gw) side_b = idx + 1;
        }
        const std::uint32_t ra = forest.find(side_a);
        const std::uint32_t rb = forest.find(side_b);
        if (ra == rb) continue;

        const std::uint32_t younger = std::min(forest.oldest(ra), forest.oldest(rb));
        const double death = filtration.cell(order[younger]).value;
        if (death > cell.value) diagram.points.push_back({cell.value, death});
        forest.link(ra, rb);
    }
    diagram.canonicalize();
    return diagram;
}

PersistenceDiagram compute_persistence(const GrayImage& chip) {
    if (chip.empty()) throw InvalidArgument("cannot build a filtration of an empty chip");
    const std::size_t w = chip.width();
    const std::size_t h = chip.height();
    const std::size_t gw = 2 * w - 1;
    if (gw * (2 * h - 1) > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("chip too large for 32-bit cell indices");
    }

    // Dense ranks of the distinct pixel values. A cell's value is the max of
    // its pixels, so comparing ranks compares values, ties included.
    const auto px = chip.pixels();
    std::vector<std::uint32_t> by_value(px.size());
    std::iota(by_value.begin(), by_value.end(), 0u);
    std::sort(by_value.begin(), by_value.end(), [&](std::uint32_t a, std::uint32_t b) { return px[a] < px[b]; });
    std::vector<std::uint32_t> rank(px.size());
    std::vector<double> level;
    for (std::uint32_t i : by_value) {
        if (level.empty() || px[i] != level.back()) level.push_back(px[i]);
        rank[i] = static_cast<std::uint32_t>(level.size() - 1);
    }

    // Edges and squares in grid-index order, then a stable counting sort by
    // rank with edges placed first: this reproduces the (value, dimension,
    // index) order of the full filtration restricted to dimensions 1 and 2.
    struct Item {
        std::uint32_t grid;
        std::uint32_t rank;
    };
    std::vector<Item> edges;
    std::vector<Item> squares;
    edges.reserve(w * (h - 1) + h * (w - 1));
    squares.reserve((w - 1) * (h - 1));
    auto pr = [&](std::size_t x, std::size_t y) { return rank[y * w + x]; };
    for (std::size_t r = 0; r < 2 * h - 1; ++r) {
        for (std::size_t c = 0; c < gw; ++c) {
            const auto grid = static_cast<std::uint32_t>(r * gw + c);
            const std::size_t x = c / 2;
            const std::size_t y = r / 2;
            const bool odd_c = c % 2 == 1;
            const bool odd_r = r % 2 == 1;
            if (odd_c && odd_r) {
                squares.push_back({grid, std::max({pr(x, y), pr(x + 1, y), pr(x, y + 1), pr(x + 1, y + 1)})});
            } else if (odd_c) {
                edges.push_back({grid, std::max(pr(x, y), pr(x + 1, y))});
            } else if (odd_r) {
                edges.push_back({grid, std::max(pr(x, y), pr(x, y + 1))});
            }
        }
    }
    std::vector<std::uint32_t> start(level.size() + 1, 0);
    for (const auto& e : edges) ++start[e.rank + 1];
    for (const auto& q : squares) ++start[q.rank + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<Item> order(edges.size() + squares.size());
    for (const auto& e : edges) order[start[e.rank]++] = e;
    for (const auto& q : squares) order[start[q.rank]++] = q;

    // Dual vertices: squares numbered y * (w - 1) + x, then the exterior.
    const auto exterior = static_cast<std::uint32_t>((w - 1) * (h - 1));
    DualForest forest(exterior + 1);
    forest.make(exterior, DualForest::kExteriorAge);
    const std::size_t sw = w - 1;

    PersistenceDiagram diagram;
    for (std::size_t pos = order.size(); pos-- > 0;) {
        const Item& item = order[pos];
        const std::size_t c = item.grid % gw;
        const std::size_t r = item.grid / gw;
        const std::size_t x = c / 2;
        const std::size_t y = r / 2;
        if (c % 2 == 1 && r % 2 == 1) {
            forest.make(static_cast<std::uint32_t>(y * sw + x), static_cast<std::uint32_t>(pos));
            continue;
        }
        std::uint32_t side_a = exterior;
        std::uint32_t side_b = exterior;
        if (c % 2 == 1) {
            // Horizontal edge: squares above and below.
            if (y > 0) side_a = static_cast<std::uint32_t>((y - 1) * sw + x);
            if (y + 1 < h) side_b = static_cast<std::uint32_t>(y * sw + x);
        } else {
            if (x > 0) side_a = static_cast<std::uint32_t>(y * sw + x - 1);
            if (x + 1 < w) side_b = static_cast<std::uint32_t>(y * sw + x);
        }
        const std::uint32_t ra = forest.find(side_a);
        const std::uint32_t rb = forest.find(side_b);
        if (ra == rb) continue;

        const std::uint32_t younger = std::min(forest.oldest(ra), forest.oldest(rb));
        const double birth = level[item.rank];
        const double death = level[order[younger].rank];
        if (death > birth) diagram.points.push_back({birth, death});
        forest.link(ra, rb);
    }
    diagram.canonicalize();
    return diagram;
}

void write_diagram_csv(const PersistenceDiagram& diagram, std::ostream& out) {
    out << "birth,death\n";
    char buf[64];
    for (const auto& p : diagram.points) {
        auto [e1, ec1] = std::to_chars(buf, buf + sizeof buf, p.birth);
        out.write(buf, e1 - buf);
        out.put(',');
        auto [e2, ec2] = std::to_chars(buf, buf + sizeof buf, p.death);
        out.write(buf, e2 - buf);
        out.put('\n');
    }
}

PersistenceDiagram read_diagram_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("diagram file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "birth,death") throw InvalidArgument("diagram header must be 'birth,death'");
    PersistenceDiagram d;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        PersistencePair p;
        const char* end = line.data() + line.size();
        auto r1 = std::from_chars(line.data(), line.data() + comma, p.birth);
        auto r2 = comma == std::string::npos
                      ? std::from_chars_result{nullptr, std::errc::invalid_argument}
                      : std::from_chars(line.data() + comma + 1, end, p.death);
        if (comma == std::string::npos || r1.ec != std::errc() || r1.ptr != line.data() + comma ||
            r2.ec != std::errc() || r2.ptr != end) {
            throw InvalidArgument("malformed diagram row " + std::to_string(line_no));
        }
        if (!(p.death > p.birth)) {
            throw InvalidArgument("diagram row " + std::to_string(line_no) +
                                  " has death <= birth");
        }
        d.points.push_back(p);
    }
    return d;
}

void save_diagram(const PersistenceDiagram& diagram, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write diagram '" + path.string() + "'");
    write_diagram_csv(diagram, out);
}

PersistenceDiagram load_diagram(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open diagram '" + path.string() + "'");
    return read_diagram_csv(in);
}

}  // namespace mfid
