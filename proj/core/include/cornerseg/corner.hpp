#pragma once

#include <array>
#include <vector>

#include "cornerseg/geometry.hpp"

namespace cornerseg {

/// One corner candidate as produced by a detector (or the scene oracle).
struct CornerDetection {
    CornerType type = CornerType::TL;
    Point position;
    double short_side = 0.0;
    double score = 0.0;

    friend bool operator==(const CornerDetection&, const CornerDetection&) = default;
};

/// Corner candidates split by type, indexed by static_cast<int>(CornerType).
using CornerSets = std::array<std::vector<CornerDetection>, 4>;

}  // namespace cornerseg
