#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cornerseg/corner.hpp"
#include "cornerseg/geometry.hpp"
#include "cornerseg/targets.hpp"
#include "cornerseg/tensor.hpp"

namespace cornerseg {

struct PipelineConfig {
    /// Corners are kept when their score is strictly greater than this.
    double corner_score_threshold = 0.5;
    /// Axis-aligned IoU for per-type NMS over corner squares.
    double corner_nms_iou = 0.3;
    /// Constructed boxes need a shortest side strictly greater than this (px).
    double min_short_side = 5.0;
    /// max(ss1, ss2) / min(ss1, ss2) must not exceed this.
    double ss_ratio_max = 1.5;
    /// Position-sensitive grid order.
    int g = 2;
    /// Candidates survive scoring only with score strictly greater than tau.
    double tau = 0.6;
    /// Rotated IoU above which the final NMS suppresses a box.
    double final_nms_iou = 0.3;
    /// Worker threads for candidate scoring; results do not depend on it.
    int threads = 1;

    void validate() const;
};

struct CandidateBox {
    RotatedRect rect;
    std::pair<CornerType, CornerType> source_pair{CornerType::TL, CornerType::TR};
    double seg_score = 0.0;
};

struct Detection {
    RotatedRect rect;
    double score = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// Raw detector outputs for one feature layer. For k scales and q = 4 corner
/// types, `scores` has k*q*2 channels ordered ((scale * 4 + type) * 2 + cls),
/// cls 0 = background and 1 = corner, holding logits; `offsets` has k*q*4
/// channels ordered ((scale * 4 + type) * 4 + j) for (dx, dy, dss, dss).
/// Spatial size is (input / stride) in both directions.
struct LayerMaps {
    Tensor3D scores;
    Tensor3D offsets;
};

/// Greedy axis-aligned NMS over the corner squares of one type, by
/// descending score (ties: smaller (x, y) first).
std::vector<CornerDetection> corner_nms(std::vector<CornerDetection> corners, double iou_threshold);

/// Drops corners whose score is not above the threshold.
CornerSets threshold_corners(const CornerSets& corners, double threshold);

/// Softmax-thresholds every (cell, scale, type) slot, decodes its offsets
/// against the default box (dss taken as the mean of the two predicted
/// values), then runs corner_nms per type. Throws ConfigError when map
/// shapes disagree with the default-box grid.
CornerSets decode_corners(std::span<const LayerMaps> maps, const DefaultBoxConfig& boxes,
                          const PipelineConfig& cfg);

inline constexpr std::array<std::pair<CornerType, CornerType>, 4> kGroupingPairs = {
    std::pair{CornerType::TL, CornerType::TR},
    std::pair{CornerType::TR, CornerType::BR},
    std::pair{CornerType::BL, CornerType::BR},
    std::pair{CornerType::TL, CornerType::BL},
};

/// Rectangle spanned by the edge between two corners of an allowed pair,
/// extended by `extent` toward the box interior implied by their types.
RotatedRect rect_from_pair(const CornerDetection& first, const CornerDetection& second, double extent);

/// Applies the three grouping rules (relative position, minimum short side,
/// short-side ratio) to one pair; returns the candidate when all pass.
/// The box extent is the mean of the two predicted short sides.
std::optional<CandidateBox> group_pair(const CornerDetection& first, const CornerDetection& second,
                                       const PipelineConfig& cfg);

/// Enumerates every (TL,TR), (TR,BR), (BL,BR), (TL,BL) pair.
std::vector<CandidateBox> sample_and_group(const CornerSets& corners, const PipelineConfig& cfg);

/// The g x g bins of a rectangle, row-major from TL: bin (r, c) has index r * g + c.
std::vector<RotatedRect> split_bins(const RotatedRect& box, int g);

/// Rotated position-sensitive ROI average pooling over a fixed set of maps.
/// Keeps per-row prefix sums so each bin costs O(rows) instead of O(pixels);
/// the set of pixels visited per bin is exactly the set whose center
/// satisfies contains(bin, center).
class SegmentationScorer {
public:
    SegmentationScorer(const Tensor3D& seg, int g);

    /// Mean over bins of the mean of channel i over the pixels of bin i;
    /// bins without pixels contribute 0.
    double score(const RotatedRect& box) const;

    int g() const { return g_; }

private:
    double bin_mean(const RotatedRect& bin, std::size_t channel) const;
    double row_sum(std::size_t channel, long row, long x0, long x1) const;

    int g_;
    long height_;
    long width_;
    /// prefix_[(c * height + y) * (width + 1) + x] = sum of seg(c, y, 0..x-1).
    std::vector<double> prefix_;
};

/// One-off convenience over SegmentationScorer. Throws ConfigError when the
/// map has a channel count other than g*g.
double rps_roi_average_pool(const RotatedRect& box, const Tensor3D& seg, int g);

/// Scores every candidate and keeps those with score > tau, ordered by
/// descending score, ties broken by lexicographic corners.
std::vector<CandidateBox> score_and_filter(std::vector<CandidateBox> candidates, const Tensor3D& seg,
                                           const PipelineConfig& cfg);

/// Greedy NMS with rotated IoU; suppresses when IoU > threshold. Input order
/// does not matter: boxes are visited by descending score, ties broken by
/// lexicographic corners.
std::vector<Detection> rotated_nms(std::span<const Detection> boxes, double iou_threshold);

/// Threshold corners, group, score, filter at tau, final NMS.
std::vector<Detection> detect(const CornerSets& corners, const Tensor3D& seg, const PipelineConfig& cfg);

/// Same as detect() starting from raw detector maps.
std::vector<Detection> detect(std::span<const LayerMaps> maps, const DefaultBoxConfig& boxes, const Tensor3D& seg,
                              const PipelineConfig& cfg);

}  // namespace cornerseg
