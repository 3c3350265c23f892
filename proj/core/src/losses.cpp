#include "cornerseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cornerseg {

void ConfBatch::validate() const {
    if (labels.empty()) throw std::invalid_argument("conf batch is empty");
    if (logits.size() != 2 * labels.size()) {
        throw std::invalid_argument("conf batch: expected " + std::to_string(2 * labels.size()) +
                                    " logits, got " + std::to_string(logits.size()));
    }
    for (double v : logits) {
        if (!std::isfinite(v)) throw std::invalid_argument("conf batch: non-finite logit");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("conf batch: labels must be 0 or 1");
    }
}

void LocBatch::validate() const {
    if (predictions.size() != targets.size()) throw std::invalid_argument("loc batch: shape mismatch");
    if (predictions.size() % 4 != 0) throw std::invalid_argument("loc batch: size must be a multiple of 4");
}

void SegBatch::validate() const {
    if (predictions.size() != labels.size()) throw std::invalid_argument("seg batch: shape mismatch");
    for (double p : predictions) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("seg batch: predictions must lie in [0, 1]");
    }
}

OhemSelection ohem_select(std::span<const double> losses, std::span<const int> labels, std::size_t ratio,
                          std::size_t zero_positive_floor) {
    if (losses.size() != labels.size()) throw std::invalid_argument("ohem: losses/labels size mismatch");
    OhemSelection sel;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0) {
            sel.indices.push_back(i);
            ++sel.num_positives;
        } else {
            negatives.push_back(i);
        }
    }
    std::size_t quota = 0;
    if (sel.num_positives == 0) {
        sel.no_positives = true;
        quota = std::min(std::max<std::size_t>(1, zero_positive_floor), negatives.size());
    } else {
        quota = std::min(ratio * sel.num_positives, negatives.size());
    }
    const auto harder = [&](std::size_t a, std::size_t b) {
        return losses[a] > losses[b] || (losses[a] == losses[b] && a < b);
    };
    std::partial_sort(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(quota), negatives.end(),
                      harder);
    sel.indices.insert(sel.indices.end(), negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(quota));
    sel.num_negatives = quota;
    std::sort(sel.indices.begin(), sel.indices.end());
    return sel;
}

std::vector<double> per_sample_cross_entropy(const ConfBatch& batch) {
    batch.validate();
    std::vector<double> out(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double z0 = batch.logits[2 * i];
        const double z1 = batch.logits[2 * i + 1];
        const double m = std::max(z0, z1);
        const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
        out[i] = lse - (batch.labels[i] == 1 ? z1 : z0);
    }
    return out;
}

LossResult conf_loss(const ConfBatch& batch, std::span<const std::size_t> selection) {
    batch.validate();
    if (selection.empty()) throw std::invalid_argument("conf_loss: empty selection");
    LossResult r;
    r.gradient.assign(batch.logits.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(selection.size());
    for (std::size_t i : selection) {
        if (i >= batch.size()) throw std::invalid_argument("conf_loss: selection index out of range");
        const double z0 = batch.logits[2 * i];
        const double z1 = batch.logits[2 * i + 1];
        const double m = std::max(z0, z1);
        const double e0 = std::exp(z0 - m);
        const double e1 = std::exp(z1 - m);
        const double sum = e0 + e1;
        const int y = batch.labels[i];
        r.value += m + std::log(sum) - (y == 1 ? z1 : z0);
        r.gradient[2 * i] += (e0 / sum - (y == 0 ? 1.0 : 0.0)) * inv;
        r.gradient[2 * i + 1] += (e1 / sum - (y == 1 ? 1.0 : 0.0)) * inv;
    }
    r.value *= inv;
    return r;
}

LossResult loc_loss(const LocBatch& batch) {
    batch.validate();
    LossResult r;
    r.gradient.resize(batch.predictions.size());
    for (std::size_t i = 0; i < batch.predictions.size(); ++i) {
        const double d = batch.predictions[i] - batch.targets[i];
        const double ad = std::abs(d);
        if (ad < kSmoothL1Beta) {
            r.value += 0.5 * d * d / kSmoothL1Beta;
            r.gradient[i] = d / kSmoothL1Beta;
        } else {
            r.value += ad - 0.5 * kSmoothL1Beta;
            r.gradient[i] = d > 0.0 ? 1.0 : -1.0;
        }
    }
    return r;
}

LossResult dice_loss(const SegBatch& batch) {
    batch.validate();
    double inter = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < batch.predictions.size(); ++i) {
        inter += batch.labels[i] * batch.predictions[i];
        total += batch.labels[i] + batch.predictions[i];
    }
    const double num = 2.0 * inter + kDiceEpsilon;
    const double den = total + kDiceEpsilon;
    LossResult r;
    r.value = 1.0 - num / den;
    r.gradient.resize(batch.predictions.size());
    const double den2 = den * den;
    for (std::size_t i = 0; i < batch.predictions.size(); ++i) {
        r.gradient[i] = -(2.0 * batch.labels[i] * den - num) / den2;
    }
    return r;
}

TotalLoss total_loss(double conf, double loc, double seg, const LossWeights& weights) {
    if (!(weights.lambda1 > 0.0) || !(weights.lambda2 > 0.0)) {
        throw std::invalid_argument("total_loss: lambda weights must be positive");
    }
    if (weights.num_pixels == 0) throw std::invalid_argument("total_loss: segmentation pixel count is zero");
    TotalLoss t;
    if (weights.num_positive == 0) {
        t.no_positives = true;
    } else {
        const double nc = static_cast<double>(weights.num_positive);
        t.conf_term = conf / nc;
        t.loc_term = weights.lambda1 * loc / nc;
    }
    t.seg_term = weights.lambda2 * seg / static_cast<double>(weights.num_pixels);
    t.value = t.conf_term + t.loc_term + t.seg_term;
    return t;
}

}  // namespace cornerseg
