#pragma once

#include <string>
#include <vector>

#include "delirisk/eval.hpp"
#include "delirisk/survival.hpp"

namespace delirisk {

/// Step plot of one or more survival curves with shaded confidence
/// bands. Returns the SVG document; provenance goes into an XML comment.
std::string km_plot_svg(const std::vector<std::pair<std::string, KMCurve>>& curves,
                        const std::string& provenance);

/// ROC polyline with the chance diagonal.
std::string roc_plot_svg(const std::vector<RocPoint>& points, double auc,
                         const std::string& provenance);

}  // namespace delirisk
