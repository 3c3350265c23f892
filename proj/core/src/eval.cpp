#include "cornerseg/eval.hpp"

#include <algorithm>
#include <numeric>

namespace cornerseg {

std::size_t Assignment::true_positives() const {
    return static_cast<std::size_t>(std::count_if(det_to_gt.begin(), det_to_gt.end(), [](long g) { return g >= 0; }));
}

std::size_t Assignment::false_positives() const { return det_to_gt.size() - true_positives(); }

std::size_t Assignment::false_negatives() const {
    return static_cast<std::size_t>(std::count(gt_to_det.begin(), gt_to_det.end(), -1L));
}

Assignment match_detections(std::span<const Detection> dets, std::span<const RotatedRect> gts,
                            double iou_threshold) {
    Assignment a;
    a.det_to_gt.assign(dets.size(), -1);
    a.gt_to_det.assign(gts.size(), -1);

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (dets[i].score != dets[j].score) return dets[i].score > dets[j].score;
        if (lexicographic_less(dets[i].rect, dets[j].rect)) return true;
        if (lexicographic_less(dets[j].rect, dets[i].rect)) return false;
        return i < j;
    });

    for (std::size_t d : order) {
        long best = -1;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (a.gt_to_det[g] >= 0) continue;
            const double iou = rotated_iou(dets[d].rect, gts[g]);
            if (iou >= iou_threshold && iou > best_iou) {
                best = static_cast<long>(g);
                best_iou = iou;
            }
        }
        if (best >= 0) {
            a.det_to_gt[d] = best;
            a.gt_to_det[static_cast<std::size_t>(best)] = static_cast<long>(d);
        }
    }
    return a;
}

Rates rates_from(const Counts& c) {
    Rates r;
    const std::size_t dets = c.true_positives + c.false_positives;
    const std::size_t gts = c.true_positives + c.false_negatives;
    r.precision = dets > 0 ? static_cast<double>(c.true_positives) / static_cast<double>(dets) : 0.0;
    r.recall = gts > 0 ? static_cast<double>(c.true_positives) / static_cast<double>(gts) : 0.0;
    const double sum = r.precision + r.recall;
    r.f_measure = sum > 0.0 ? 2.0 * r.precision * r.recall / sum : 0.0;
    return r;
}

EvalReport report(std::span<const Assignment> per_image) {
    EvalReport rep;
    for (const Assignment& a : per_image) {
        const Counts c{a.true_positives(), a.false_positives(), a.false_negatives()};
        rep.per_image.push_back(c);
        rep.per_image_rates.push_back(rates_from(c));
        rep.totals.true_positives += c.true_positives;
        rep.totals.false_positives += c.false_positives;
        rep.totals.false_negatives += c.false_negatives;
    }
    rep.rates = rates_from(rep.totals);
    return rep;
}

EvalReport report(const Assignment& single) { return report(std::span(&single, 1)); }

}  // namespace cornerseg
