#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cornerseg/geometry.hpp"
#include "cornerseg/tensor.hpp"

namespace cornerseg {

/// Relabels a rectangle's corners so that the TL->TR edge is within 45
/// degrees of horizontal; equivalently x_TL < x_TR, x_BL < x_BR,
/// y_TL < y_BL and y_TR < y_BR. Input corners may come in any order.
///
/// At exactly 45 degrees two labelings qualify; the one whose TL has the
/// smaller (y, x) wins.
RotatedRect canonical_corner_order(std::span<const Point, 4> quad);
RotatedRect canonical_corner_order(const RotatedRect& r);

/// A corner point encoded as an axis-aligned square centered on the corner.
struct CornerSquare {
    CornerType type = CornerType::TL;
    Point center;
    double side = 0.0;

    AxisAlignedBox box() const { return AxisAlignedBox::centered_square(center, side); }
    friend bool operator==(const CornerSquare&, const CornerSquare&) = default;
};

/// Four squares (TL, TR, BR, BL) with side = short side of r.
/// Throws DegenerateGeometry when the short side is zero.
std::array<CornerSquare, 4> corner_squares(const RotatedRect& r);

/// Position-sensitive masks: channel (row * g + col) holds 1 for every pixel
/// whose center lies in bin (row, col) of some box, where bins form a g x g
/// grid starting at TL, columns along TL->TR and rows along TL->BL.
/// Interior bin boundaries are half-open so bins of one box never overlap.
Tensor3D ps_masks(std::span<const RotatedRect> boxes, int g, std::size_t height, std::size_t width);

struct FeatureLayer {
    std::string name;
    int stride = 0;
    std::vector<double> scales;
};

struct DefaultBoxConfig {
    int input_width = 512;
    int input_height = 512;
    std::vector<FeatureLayer> layers = default_layers();

    /// F3..F11 with the published scale table and strides 4..256.
    static std::vector<FeatureLayer> default_layers();
    /// Throws ConfigError on empty layers, non-positive strides/scales or
    /// input sizes not divisible by a stride.
    void validate() const;
};

struct DefaultBox {
    int layer_index = 0;
    int row = 0;
    int col = 0;
    int scale_index = 0;
    Point center;
    double side = 0.0;

    AxisAlignedBox box() const { return AxisAlignedBox::centered_square(center, side); }
};

/// Enumerates boxes layer by layer, then row, column, scale.
std::vector<DefaultBox> generate_default_boxes(const DefaultBoxConfig& cfg);

/// Index of the box for (layer, row, col, scale) within the enumeration of
/// generate_default_boxes.
std::size_t default_box_index(const DefaultBoxConfig& cfg, int layer, int row, int col, int scale);

struct CornerMatch {
    std::size_t box_index = 0;
    std::size_t square_index = 0;
    CornerType type = CornerType::TL;
    double iou = 0.0;
};

struct MatchResult {
    std::size_t num_boxes = 0;
    /// labels[box * 4 + type] = matched square index, or -1 for a negative.
    std::vector<long> labels;
    std::vector<double> overlaps;

    /// Positive (box, type) pairs in (box, type) order.
    std::vector<CornerMatch> positives(std::span<const CornerSquare> squares) const;
    /// Negative (box, type) pairs as box * 4 + type, ascending.
    std::vector<std::size_t> negatives() const;
    std::size_t num_positives() const;
};

inline constexpr double kDefaultMatchThreshold = 0.5;

/// SSD-style matching run independently per corner type: a (box, type) slot
/// is positive when its best same-type square has axis-aligned IoU >=
/// threshold; every square additionally claims its best-overlapping box.
/// One default box may be positive for several corner types at once.
MatchResult match(std::span<const DefaultBox> boxes, std::span<const CornerSquare> squares,
                  double threshold = kDefaultMatchThreshold);

struct OffsetTarget {
    double dx = 0.0;
    double dy = 0.0;
    double dss = 0.0;

    /// (dx, dy, dss, dss), the regression target layout.
    std::array<double, 4> as_array() const { return {dx, dy, dss, dss}; }
};

/// dx = (x_b - x_c) / ss_b, dy = (y_b - y_c) / ss_b, dss = log(ss_b / ss_c).
/// Throws InvalidBox for non-positive sides.
OffsetTarget encode_offsets(const DefaultBox& b, const CornerSquare& c);
CornerSquare decode_offsets(const DefaultBox& b, const OffsetTarget& o, CornerType type);

}  // namespace cornerseg
