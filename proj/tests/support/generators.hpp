#pragma once

// Seeded random inputs for property tests.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cornerseg/geometry.hpp"
#include "cornerseg/tensor.hpp"

namespace cornerseg::gen {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline RotatedRect rect(std::mt19937_64& rng, double center_lo, double center_hi, double side_lo, double side_hi) {
    return from_center_form(uniform(rng, center_lo, center_hi), uniform(rng, center_lo, center_hi),
                            uniform(rng, side_lo, side_hi), uniform(rng, side_lo, side_hi),
                            uniform(rng, -std::numbers::pi / 2, std::numbers::pi / 2));
}

/// Second rectangle placed near the first so that the pair usually overlaps.
inline RotatedRect rect_near(std::mt19937_64& rng, const RotatedRect& r, double side_lo, double side_hi) {
    const Point c = r.center();
    const double spread = 0.5 * std::max(r.width(), r.height());
    return from_center_form(c.x + uniform(rng, -spread, spread), c.y + uniform(rng, -spread, spread),
                            uniform(rng, side_lo, side_hi), uniform(rng, side_lo, side_hi),
                            uniform(rng, -std::numbers::pi / 2, std::numbers::pi / 2));
}

inline Tensor3D tensor(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w) {
    Tensor3D t(c, h, w);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (float& v : t.data()) v = u(rng);
    return t;
}

}  // namespace cornerseg::gen
