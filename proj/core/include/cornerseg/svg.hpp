#pragma once

#include <span>
#include <string>

#include "cornerseg/geometry.hpp"
#include "cornerseg/pipeline.hpp"

namespace cornerseg {

/// SVG document with ground truth outlined in green and detections in red
/// (labelled with their score).
std::string render_overlay_svg(int width, int height, std::span<const RotatedRect> ground_truth,
                               std::span<const Detection> detections);

}  // namespace cornerseg
