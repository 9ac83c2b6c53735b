#pragma once

#include <string>

#include "s2g/types.hpp"

namespace s2g::viz {

inline constexpr double kViewport = 512.0;

/// Planar set in the unit square drawn on a 512×512 canvas. Each undirected
/// edge gets one stroke class: "agree" (in both), "missed" (truth only) or
/// "extra" (prediction only). Output bytes depend only on the inputs.
std::string render_triangulation_svg(const PointSet& points, const EdgeLabels& truth,
                                     const EdgeLabels& pred);

}  // namespace s2g::viz
