#pragma once

#include <string>

#include "mfid/analytics.hpp"
#include "mfid/persim.hpp"

namespace mfid {

struct ProjectionRow;

namespace svg {

/// Two heatmaps side by side on a shared color scale. An all-zero pair
/// renders with a blank scale.
std::string pi_heatmap_pair(const PersistenceImage& experimental, const PersistenceImage& synthetic,
                            const std::string& title);

/// PC1-PC2, PC1-PC3 and PC2-PC3 scatter panels; experimental and synthetic
/// points use different markers.
std::string pca_panels(const std::vector<ProjectionRow>& rows, const std::string& title);

/// Area fraction against threshold for both corpora.
std::string area_fraction_chart(const AreaFractionCurve& experimental,
                                const AreaFractionCurve& synthetic, const std::string& title);

}  // namespace svg
}  // namespace mfid
