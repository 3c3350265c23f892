#pragma once

#include <array>
#include <cstdint>

#include "cornerseg/corner.hpp"
#include "cornerseg/tensor.hpp"
#include "cornerseg/tensorio.hpp"

namespace cornerseg {

struct NoiseConfig {
    /// Standard deviation of the Gaussian added to corner positions (px).
    double corner_jitter_sigma = 0.0;
    /// Standard deviation of the half-normal subtracted from corner scores.
    double corner_score_noise = 0.0;
    /// Per corner type probability of removing a true corner.
    std::array<double, 4> drop_prob{0.0, 0.0, 0.0, 0.0};
    /// Each true corner spawns a random spurious corner with this probability.
    double spurious_rate = 0.0;
    /// Probability of flipping each mask pixel of each channel.
    double seg_flip_rate = 0.0;

    bool is_zero() const;
    void validate() const;
};

struct SynthConfig {
    int image_width = 512;
    int image_height = 512;
    int min_boxes = 1;
    int max_boxes = 8;
    /// Long-side orientation range in degrees.
    double theta_min_deg = -80.0;
    double theta_max_deg = 80.0;
    double short_side_min = 8.0;
    double short_side_max = 40.0;
    double aspect_min = 1.0;
    double aspect_max = 6.0;
    /// Minimum gap between any two boxes (px).
    double min_separation = 8.0;
    /// Boxes stay this far inside the image border (px).
    double margin = 4.0;
    /// Same-type corner squares of different boxes must overlap at most this
    /// much (axis-aligned IoU), so per-type corner NMS keeps every true corner.
    double max_corner_square_iou = 0.3;
    /// Grid order of the generated position-sensitive masks.
    int g = 2;
    int max_attempts_per_box = 2000;
    NoiseConfig noise;

    void validate() const;
};

struct SynthScene {
    SceneAnnotation annotation;
    CornerSets corners;
    Tensor3D masks;
};

/// Places non-overlapping boxes (canonical corner order), emits their exact
/// corners with score 1 and true short side, and their position-sensitive
/// masks. Deterministic in (cfg, seed); noise in cfg is not applied.
/// Throws SynthError when a box cannot be placed within the attempt budget.
SynthScene generate_scene(const SynthConfig& cfg, std::uint64_t seed);

/// Applies jitter, score noise, drops, spurious corners and mask flips.
/// Deterministic in (noise, seed); zero noise returns the input unchanged.
SynthScene corrupt(const SynthScene& scene, const NoiseConfig& noise, std::uint64_t seed,
                   double short_side_min = 8.0, double short_side_max = 40.0);

/// Minimum distance between two convex quadrilaterals; 0 when they touch or overlap.
double polygon_distance(const RotatedRect& a, const RotatedRect& b);

}  // namespace cornerseg
