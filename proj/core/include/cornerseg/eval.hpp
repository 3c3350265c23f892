#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cornerseg/geometry.hpp"
#include "cornerseg/pipeline.hpp"

namespace cornerseg {

inline constexpr double kDefaultEvalIou = 0.5;

struct Assignment {
    /// For each detection (input order): matched GT index or -1.
    std::vector<long> det_to_gt;
    /// For each GT: matched detection index or -1.
    std::vector<long> gt_to_det;

    std::size_t true_positives() const;
    std::size_t false_positives() const;
    std::size_t false_negatives() const;
};

/// Greedy one-to-one matching: detections are visited by descending score
/// (ties: lexicographic corners) and each claims the unmatched GT with the
/// highest rotated IoU >= threshold (ties: lower GT index).
Assignment match_detections(std::span<const Detection> dets, std::span<const RotatedRect> gts,
                            double iou_threshold = kDefaultEvalIou);

struct Counts {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
};

struct Rates {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

/// Precision is 0 with no detections, recall is 0 with no GT, and
/// F = 2PR / (P + R) or 0 when P + R = 0.
Rates rates_from(const Counts& counts);

struct EvalReport {
    Counts totals;
    Rates rates;
    std::vector<Counts> per_image;
    std::vector<Rates> per_image_rates;
};

EvalReport report(std::span<const Assignment> per_image);
EvalReport report(const Assignment& single);

}  // namespace cornerseg
