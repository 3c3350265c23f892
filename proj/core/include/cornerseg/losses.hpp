#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cornerseg {

// Training objective of the corner/segmentation detector. All functions are
// pure and return analytic gradients alongside values; reductions run in a
// fixed sequential order so results are bitwise reproducible.

struct LossResult {
    double value = 0.0;
    /// Same layout as the prediction input.
    std::vector<double> gradient;
};

/// Two-way corner/background logits, row-major [N, 2], with labels in {0, 1}.
struct ConfBatch {
    std::vector<double> logits;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    void validate() const;
};

/// Offset predictions and targets, row-major [M, 4].
struct LocBatch {
    std::vector<double> predictions;
    std::vector<double> targets;

    void validate() const;
};

/// Segmentation probabilities in [0, 1] and binary labels, flattened.
struct SegBatch {
    std::vector<double> predictions;
    std::vector<double> labels;

    void validate() const;
};

struct OhemSelection {
    /// Selected sample indices, ascending.
    std::vector<std::size_t> indices;
    std::size_t num_positives = 0;
    std::size_t num_negatives = 0;
    /// Set when the batch had no positives and the negative floor was used.
    bool no_positives = false;
};

inline constexpr std::size_t kOhemNegativeRatio = 3;
inline constexpr std::size_t kOhemZeroPositiveFloor = 16;

/// All positives plus the min(ratio * |pos|, |neg|) negatives with the
/// largest loss (ties: lower index first). Without positives, the top
/// min(floor, |neg|) negatives are taken instead.
OhemSelection ohem_select(std::span<const double> losses, std::span<const int> labels,
                          std::size_t ratio = kOhemNegativeRatio,
                          std::size_t zero_positive_floor = kOhemZeroPositiveFloor);

/// Softmax cross-entropy of every sample, max-subtracted for stability.
std::vector<double> per_sample_cross_entropy(const ConfBatch& batch);

/// Mean softmax cross-entropy over the selected samples; the gradient w.r.t.
/// the logits is zero outside the selection. Throws std::invalid_argument on
/// an empty selection.
LossResult conf_loss(const ConfBatch& batch, std::span<const std::size_t> selection);

inline constexpr double kSmoothL1Beta = 1.0;

/// Elementwise smooth-L1 (0.5 d^2 for |d| < 1, |d| - 0.5 otherwise) summed
/// over all entries. Normalization by the positive count happens in
/// total_loss.
LossResult loc_loss(const LocBatch& batch);

inline constexpr double kDiceEpsilon = 1e-6;

/// 1 - (2 sum(y p) + eps) / (sum(y) + sum(p) + eps), sums over the batch.
LossResult dice_loss(const SegBatch& batch);

struct LossWeights {
    double lambda1 = 1.0;
    double lambda2 = 10.0;
    /// Number of positive default boxes.
    std::size_t num_positive = 0;
    /// Number of segmentation pixels.
    std::size_t num_pixels = 0;
};

struct TotalLoss {
    double value = 0.0;
    double conf_term = 0.0;
    double loc_term = 0.0;
    double seg_term = 0.0;
    /// Set when num_positive == 0; conf and loc terms are then 0.
    bool no_positives = false;
};

/// conf / N_c + lambda1 * loc / N_c + lambda2 * seg / N_s.
/// Throws std::invalid_argument when N_s == 0 or a lambda is not positive.
TotalLoss total_loss(double conf, double loc, double seg, const LossWeights& weights);

}  // namespace cornerseg
