#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numerical code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "mfid/cubical.hpp"

namespace mfid::testing {

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns
/// eigenvalues in descending order with eigenvectors as matching rows.
inline std::pair<std::vector<double>, std::vector<std::vector<double>>> jacobi_eigen(
    std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
    for (std::size_t i : idx) {
        values.push_back(a[i][i]);
        std::vector<double> col(n);
        for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
        vectors.push_back(std::move(col));
    }
    return {values, vectors};
}

/// Exact bottleneck distance (L-infinity ground metric, points may match the
/// diagonal) by threshold search over candidate costs plus bipartite matching.
inline double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t size = n + m;
    if (size == 0) return 0.0;
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Left: a-points then diagonal slots for b; right: b-points then diagonal slots for a.
    std::vector<std::vector<double>> cost(size, std::vector<double>(size, inf));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            cost[i][j] = std::max(std::abs(a.points[i].birth - b.points[j].birth),
                                  std::abs(a.points[i].death - b.points[j].death));
        }
        cost[i][m + i] = a.points[i].persistence() / 2.0;
    }
    for (std::size_t j = 0; j < m; ++j) {
        cost[n + j][j] = b.points[j].persistence() / 2.0;
        for (std::size_t i = 0; i < n; ++i) cost[n + j][m + i] = 0.0;
    }

    std::vector<double> candidates;
    for (const auto& row : cost)
        for (double c : row)
            if (c < inf) candidates.push_back(c);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    auto perfect = [&](double eps) {
        std::vector<int> match_right(size, -1);
        for (std::size_t l = 0; l < size; ++l) {
            std::vector<char> seen(size, 0);
            std::function<bool(std::size_t)> augment = [&](std::size_t u) {
                for (std::size_t r = 0; r < size; ++r) {
                    if (cost[u][r] > eps || seen[r]) continue;
                    seen[r] = 1;
                    if (match_right[r] < 0 || augment(static_cast<std::size_t>(match_right[r]))) {
                        match_right[r] = static_cast<int>(u);
                        return true;
                    }
                }
                return false;
            };
            if (!augment(l)) return false;
        }
        return true;
    };

    std::size_t lo = 0;
    std::size_t hi = candidates.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (perfect(candidates[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return candidates[lo];
}

/// Composite 5-point Gauss-Legendre quadrature of f over [a, b].
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           int panels = 16) {
    static constexpr double nodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                                        -0.9061798459386640, 0.9061798459386640};
    static constexpr double weights[5] = {0.5688888888888889, 0.4786286704993665,
                                          0.4786286704993665, 0.2369268850561891,
                                          0.2369268850561891};
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int k = 0; k < 5; ++k) total += weights[k] * f(mid + 0.5 * h * nodes[k]);
    }
    return total * 0.5 * h;
}

/// Integral of an isotropic 2-D Gaussian density over a rectangle, by nested
/// quadrature of the density itself (no erf).
inline double gaussian_mass_2d(double mx, double my, double sigma, double x0, double x1, double y0,
                               double y1) {
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    auto inner = [&](double x) {
        return integrate_1d(
            [&](double y) {
                const double dx = x - mx;
                const double dy = y - my;
                return norm * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            },
            y0, y1);
    };
    return integrate_1d(inner, x0, x1);
}

}  // namespace mfid::testing
