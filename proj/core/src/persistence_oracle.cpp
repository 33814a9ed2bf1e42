// Textbook boundary-matrix reduction used as ground truth for the fast path.
// Deliberately unoptimized: no clearing, no twist, no duality.

#include <algorithm>
#include <iterator>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "mfid/cubical.hpp"
#include "mfid/error.hpp"

namespace mfid {

namespace {

struct OracleCell {
    int dimension;
    double value;
    std::vector<int> faces;  // indices into the cell list
};

// Cells are numbered block by block: vertices, horizontal edges, vertical
// edges, squares.
std::vector<OracleCell> enumerate_cells(const GrayImage& img) {
    const int w = static_cast<int>(img.width());
    const int h = static_cast<int>(img.height());
    auto px = [&](int x, int y) { return img(static_cast<std::size_t>(x), static_cast<std::size_t>(y)); };

    std::vector<OracleCell> cells;
    auto vertex = [w](int x, int y) { return y * w + x; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) cells.push_back({0, px(x, y), {}});

    const int hedge_base = static_cast<int>(cells.size());
    auto hedge = [&](int x, int y) { return hedge_base + y * (w - 1) + x; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x + 1 < w; ++x)
            cells.push_back({1, std::max(px(x, y), px(x + 1, y)), {vertex(x, y), vertex(x + 1, y)}});

    const int vedge_base = static_cast<int>(cells.size());
    auto vedge = [&](int x, int y) { return vedge_base + y * w + x; };
    for (int y = 0; y + 1 < h; ++y)
        for (int x = 0; x < w; ++x)
            cells.push_back({1, std::max(px(x, y), px(x, y + 1)), {vertex(x, y), vertex(x, y + 1)}});

    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            double v = std::max(std::max(px(x, y), px(x + 1, y)), std::max(px(x, y + 1), px(x + 1, y + 1)));
            cells.push_back({2, v, {hedge(x, y), hedge(x, y + 1), vedge(x, y), vedge(x + 1, y)}});
        }
    }
    return cells;
}

}  // namespace

PersistenceDiagram brute_force_persistence(const GrayImage& chip) {
    if (chip.empty()) throw InvalidArgument("cannot compute persistence of an empty chip");
    if (chip.width() > kBruteForceMaxSide || chip.height() > kBruteForceMaxSide) {
        throw InvalidArgument("brute-force persistence is limited to " +
                              std::to_string(kBruteForceMaxSide) + "x" +
                              std::to_string(kBruteForceMaxSide) + " chips");
    }
    const auto cells = enumerate_cells(chip);
    const int n = static_cast<int>(cells.size());

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::tie(cells[a].value, cells[a].dimension, a) <
               std::tie(cells[b].value, cells[b].dimension, b);
    });
    std::vector<int> position(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) position[order[i]] = i;

    // Columns hold sorted row positions; low is the last entry.
    std::vector<std::vector<int>> columns(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        for (int f : cells[order[j]].faces) columns[j].push_back(position[f]);
        std::sort(columns[j].begin(), columns[j].end());
    }

    std::map<int, int> column_with_low;
    PersistenceDiagram diagram;
    for (int j = 0; j < n; ++j) {
        auto& col = columns[j];
        while (!col.empty()) {
            auto it = column_with_low.find(col.back());
            if (it == column_with_low.end()) break;
            std::vector<int> sum;
            const auto& other = columns[it->second];
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                          std::back_inserter(sum));
            col = std::move(sum);
        }
        if (col.empty()) continue;
        column_with_low[col.back()] = j;
        const OracleCell& killer = cells[order[j]];
        const OracleCell& creator = cells[order[col.back()]];
        if (killer.dimension == 2 && killer.value > creator.value) {
            diagram.points.push_back({creator.value, killer.value});
        }
    }
    diagram.canonicalize();
    return diagram;
}

}  // namespace mfid
