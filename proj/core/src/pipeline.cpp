#include "cornerseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "cornerseg/error.hpp"

namespace cornerseg {

namespace {

bool corner_before(const CornerDetection& a, const CornerDetection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.position.x != b.position.x) return a.position.x < b.position.x;
    if (a.position.y != b.position.y) return a.position.y < b.position.y;
    return a.short_side < b.short_side;
}

bool ranks_before(double score_a, const RotatedRect& a, double score_b, const RotatedRect& b) {
    if (score_a != score_b) return score_a > score_b;
    return lexicographic_less(a, b);
}

// Clockwise edge (from, to) that an allowed pair spans.
std::pair<CornerType, CornerType> clockwise_edge(CornerType first, CornerType second) {
    using enum CornerType;
    if (first == TL && second == TR) return {TL, TR};
    if (first == TR && second == BR) return {TR, BR};
    if (first == BL && second == BR) return {BR, BL};
    if (first == TL && second == BL) return {BL, TL};
    throw std::invalid_argument(std::string("corner pair (") + corner_type_name(first) + ", " +
                                corner_type_name(second) + ") is not a grouping pair");
}

bool relative_position_ok(const CornerDetection& a, const CornerDetection& b) {
    using enum CornerType;
    if (a.type == TL && b.type == TR) return a.position.x < b.position.x;
    if (a.type == TR && b.type == BR) return a.position.y < b.position.y;
    if (a.type == BL && b.type == BR) return a.position.x < b.position.x;
    if (a.type == TL && b.type == BL) return a.position.y < b.position.y;
    return false;
}

}  // namespace

void PipelineConfig::validate() const {
    const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(corner_score_threshold)) throw ConfigError("corner_score_threshold must lie in [0, 1]");
    if (!unit(corner_nms_iou)) throw ConfigError("corner_nms_iou must lie in [0, 1]");
    if (!unit(final_nms_iou)) throw ConfigError("final_nms_iou must lie in [0, 1]");
    if (!unit(tau)) throw ConfigError("tau must lie in [0, 1]");
    if (!(min_short_side >= 0.0)) throw ConfigError("min_short_side must be non-negative");
    if (!(ss_ratio_max >= 1.0)) throw ConfigError("ss_ratio_max must be >= 1");
    if (g < 1) throw ConfigError("g must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::vector<CornerDetection> corner_nms(std::vector<CornerDetection> corners, double iou_threshold) {
    std::sort(corners.begin(), corners.end(), corner_before);
    std::vector<CornerDetection> kept;
    std::vector<AxisAlignedBox> kept_boxes;
    for (const CornerDetection& c : corners) {
        const AxisAlignedBox box = AxisAlignedBox::centered_square(c.position, c.short_side);
        bool suppressed = false;
        for (const AxisAlignedBox& k : kept_boxes) {
            if (axis_aligned_iou(box, k) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) {
            kept.push_back(c);
            kept_boxes.push_back(box);
        }
    }
    return kept;
}

CornerSets threshold_corners(const CornerSets& corners, double threshold) {
    CornerSets out;
    for (std::size_t t = 0; t < 4; ++t) {
        for (const CornerDetection& c : corners[t]) {
            if (c.score > threshold) out[t].push_back(c);
        }
    }
    return out;
}

CornerSets decode_corners(std::span<const LayerMaps> maps, const DefaultBoxConfig& boxes,
                          const PipelineConfig& cfg) {
    boxes.validate();
    cfg.validate();
    if (maps.size() != boxes.layers.size()) {
        throw ConfigError("expected maps for " + std::to_string(boxes.layers.size()) + " layers, got " +
                          std::to_string(maps.size()));
    }
    CornerSets raw;
    for (std::size_t l = 0; l < maps.size(); ++l) {
        const FeatureLayer& layer = boxes.layers[l];
        const std::size_t rows = static_cast<std::size_t>(boxes.input_height / layer.stride);
        const std::size_t cols = static_cast<std::size_t>(boxes.input_width / layer.stride);
        const std::size_t k = layer.scales.size();
        const Tensor3D& scores = maps[l].scores;
        const Tensor3D& offsets = maps[l].offsets;
        if (scores.channels() != k * 8 || scores.height() != rows || scores.width() != cols) {
            throw ConfigError("layer " + layer.name + ": score map must be " + std::to_string(k * 8) + "x" +
                              std::to_string(rows) + "x" + std::to_string(cols));
        }
        if (offsets.channels() != k * 16 || offsets.height() != rows || offsets.width() != cols) {
            throw ConfigError("layer " + layer.name + ": offset map must be " + std::to_string(k * 16) + "x" +
                              std::to_string(rows) + "x" + std::to_string(cols));
        }
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const Point center{(static_cast<double>(c) + 0.5) * layer.stride,
                                   (static_cast<double>(r) + 0.5) * layer.stride};
                for (std::size_t s = 0; s < k; ++s) {
                    for (CornerType type : kCornerTypes) {
                        const std::size_t slot = s * 4 + static_cast<std::size_t>(type);
                        const double bg = scores.at(slot * 2, r, c);
                        const double fg = scores.at(slot * 2 + 1, r, c);
                        const double p = 1.0 / (1.0 + std::exp(bg - fg));
                        if (!(p > cfg.corner_score_threshold)) continue;
                        const DefaultBox box{static_cast<int>(l), static_cast<int>(r), static_cast<int>(c),
                                             static_cast<int>(s), center, layer.scales[s]};
                        const OffsetTarget o{offsets.at(slot * 4, r, c), offsets.at(slot * 4 + 1, r, c),
                                             0.5 * (static_cast<double>(offsets.at(slot * 4 + 2, r, c)) +
                                                    offsets.at(slot * 4 + 3, r, c))};
                        const CornerSquare sq = decode_offsets(box, o, type);
                        if (!(sq.side > 0.0) || !std::isfinite(sq.side)) continue;
                        raw[static_cast<int>(type)].push_back({type, sq.center, sq.side, p});
                    }
                }
            }
        }
    }
    CornerSets out;
    for (std::size_t t = 0; t < 4; ++t) out[t] = corner_nms(std::move(raw[t]), cfg.corner_nms_iou);
    return out;
}

RotatedRect rect_from_pair(const CornerDetection& first, const CornerDetection& second, double extent) {
    const auto [from_type, to_type] = clockwise_edge(first.type, second.type);
    const Point from = from_type == first.type ? first.position : second.position;
    const Point to = to_type == first.type ? first.position : second.position;
    const Point d = to - from;
    const double len = norm(d);
    const Point inward = len > 0.0 ? Point{-d.y / len, d.x / len} * extent : Point{};

    RotatedRect r;
    r.corners[static_cast<int>(from_type)] = from;
    r.corners[static_cast<int>(to_type)] = to;
    // The remaining two corners sit opposite `to` and `from` respectively.
    const int opposite_to = (static_cast<int>(to_type) + 1) % 4;
    const int opposite_from = (static_cast<int>(from_type) + 3) % 4;
    r.corners[opposite_to] = to + inward;
    r.corners[opposite_from] = from + inward;
    return r;
}

std::optional<CandidateBox> group_pair(const CornerDetection& first, const CornerDetection& second,
                                       const PipelineConfig& cfg) {
    if (!relative_position_ok(first, second)) return std::nullopt;
    const double lo = std::min(first.short_side, second.short_side);
    const double hi = std::max(first.short_side, second.short_side);
    if (!(lo > 0.0) || hi / lo > cfg.ss_ratio_max) return std::nullopt;
    const double extent = 0.5 * (first.short_side + second.short_side);
    const double edge = norm(second.position - first.position);
    if (!(std::min(edge, extent) > cfg.min_short_side)) return std::nullopt;
    return CandidateBox{rect_from_pair(first, second, extent), {first.type, second.type}, 0.0};
}

std::vector<CandidateBox> sample_and_group(const CornerSets& corners, const PipelineConfig& cfg) {
    std::vector<CandidateBox> out;
    for (const auto& [ta, tb] : kGroupingPairs) {
        for (const CornerDetection& a : corners[static_cast<int>(ta)]) {
            for (const CornerDetection& b : corners[static_cast<int>(tb)]) {
                if (auto cand = group_pair(a, b, cfg)) out.push_back(*cand);
            }
        }
    }
    return out;
}

std::vector<RotatedRect> split_bins(const RotatedRect& box, int g) {
    const Point origin = box.tl();
    const Point u = box.tr() - origin;
    const Point v = box.bl() - origin;
    const auto at = [&](int r, int c) {
        return origin + u * (static_cast<double>(c) / g) + v * (static_cast<double>(r) / g);
    };
    std::vector<RotatedRect> bins;
    bins.reserve(static_cast<std::size_t>(g) * g);
    for (int r = 0; r < g; ++r) {
        for (int c = 0; c < g; ++c) {
            bins.push_back(RotatedRect{{at(r, c), at(r, c + 1), at(r + 1, c + 1), at(r + 1, c)}});
        }
    }
    return bins;
}

SegmentationScorer::SegmentationScorer(const Tensor3D& seg, int g)
    : g_(g), height_(static_cast<long>(seg.height())), width_(static_cast<long>(seg.width())) {
    if (g < 1) throw ConfigError("g must be >= 1");
    if (seg.channels() != static_cast<std::size_t>(g) * g) {
        throw ConfigError("segmentation maps have " + std::to_string(seg.channels()) + " channels, expected " +
                          std::to_string(g * g));
    }
    const std::size_t stride = seg.width() + 1;
    prefix_.assign(seg.channels() * seg.height() * stride, 0.0);
    for (std::size_t c = 0; c < seg.channels(); ++c) {
        for (std::size_t y = 0; y < seg.height(); ++y) {
            double* row = prefix_.data() + (c * seg.height() + y) * stride;
            double acc = 0.0;
            for (std::size_t x = 0; x < seg.width(); ++x) {
                acc += seg.at(c, y, x);
                row[x + 1] = acc;
            }
        }
    }
}

double SegmentationScorer::row_sum(std::size_t channel, long row, long x0, long x1) const {
    const double* p = prefix_.data() + (channel * height_ + row) * (width_ + 1);
    return p[x1 + 1] - p[x0];
}

double SegmentationScorer::bin_mean(const RotatedRect& bin, std::size_t channel) const {
    const AxisAlignedBox bb = bounding_box(bin);
    const long x0 = std::max(0L, static_cast<long>(std::floor(bb.x_min - 0.5)));
    const long x1 = std::min(width_ - 1, static_cast<long>(std::ceil(bb.x_max - 0.5)));
    const long y0 = std::max(0L, static_cast<long>(std::floor(bb.y_min - 0.5)));
    const long y1 = std::min(height_ - 1, static_cast<long>(std::ceil(bb.y_max - 0.5)));
    if (x0 > x1 || y0 > y1) return 0.0;

    double sum = 0.0;
    long count = 0;
    for (long py = y0; py <= y1; ++py) {
        const double yc = py + 0.5;
        const auto inside = [&](long px) { return contains(bin, {px + 0.5, yc}); };

        // Analytic crossing of the row line with the bin outline seeds the span.
        double xl = std::numeric_limits<double>::infinity();
        double xr = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i) {
            const Point a = bin.corners[i];
            const Point b = bin.corners[(i + 1) % 4];
            if (yc < std::min(a.y, b.y) || yc > std::max(a.y, b.y)) continue;
            if (a.y == b.y) {
                xl = std::min({xl, a.x, b.x});
                xr = std::max({xr, a.x, b.x});
            } else {
                const double x = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
                xl = std::min(xl, x);
                xr = std::max(xr, x);
            }
        }

        long lo = 1;
        long hi = 0;
        if (xl <= xr) {
            lo = std::max(x0, static_cast<long>(std::ceil(xl - 0.5)));
            hi = std::min(x1, static_cast<long>(std::floor(xr - 0.5)));
            while (lo <= hi && !inside(lo)) ++lo;
            while (hi >= lo && !inside(hi)) --hi;
        }
        if (lo > hi) {
            // Nothing inside the analytic span; fall back to scanning the row.
            lo = x0;
            while (lo <= x1 && !inside(lo)) ++lo;
            if (lo > x1) continue;
            hi = lo;
        }
        // The tolerant predicate may accept pixels just outside the analytic span.
        while (lo - 1 >= x0 && inside(lo - 1)) --lo;
        while (hi + 1 <= x1 && inside(hi + 1)) ++hi;

        sum += row_sum(channel, py, lo, hi);
        count += hi - lo + 1;
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

double SegmentationScorer::score(const RotatedRect& box) const {
    const std::vector<RotatedRect> bins = split_bins(box, g_);
    double total = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) total += bin_mean(bins[i], i);
    return total / static_cast<double>(bins.size());
}

double rps_roi_average_pool(const RotatedRect& box, const Tensor3D& seg, int g) {
    return SegmentationScorer(seg, g).score(box);
}

std::vector<CandidateBox> score_and_filter(std::vector<CandidateBox> candidates, const Tensor3D& seg,
                                           const PipelineConfig& cfg) {
    cfg.validate();
    const SegmentationScorer scorer(seg, cfg.g);
    const std::size_t n = candidates.size();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (CandidateBox& c : candidates) c.seg_score = scorer.score(c.rect);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers) candidates[i].seg_score = scorer.score(candidates[i].rect);
            });
        }
    }

    std::vector<CandidateBox> kept;
    for (CandidateBox& c : candidates) {
        if (c.seg_score > cfg.tau) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(), [](const CandidateBox& a, const CandidateBox& b) {
        return ranks_before(a.seg_score, a.rect, b.seg_score, b.rect);
    });
    return kept;
}

std::vector<Detection> rotated_nms(std::span<const Detection> boxes, double iou_threshold) {
    std::vector<Detection> order(boxes.begin(), boxes.end());
    std::sort(order.begin(), order.end(), [](const Detection& a, const Detection& b) {
        return ranks_before(a.score, a.rect, b.score, b.rect);
    });

    struct Kept {
        const Detection* det;
        AxisAlignedBox aabb;
        double area;
    };
    std::vector<Kept> kept;
    for (const Detection& d : order) {
        const AxisAlignedBox aabb = bounding_box(d.rect);
        const double area = d.rect.area();
        bool suppressed = false;
        for (const Kept& k : kept) {
            if (!overlaps(aabb, k.aabb)) continue;
            // IoU <= min(area) / max(area); skip boxes that cannot exceed the threshold.
            const double bound = std::min(area, k.area) / std::max(area, k.area);
            if (bound < iou_threshold * (1.0 - 1e-9)) continue;
            if (rotated_iou(d.rect, k.det->rect) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back({&d, aabb, area});
    }
    std::vector<Detection> out;
    out.reserve(kept.size());
    for (const Kept& k : kept) out.push_back(*k.det);
    return out;
}

namespace {

std::vector<Detection> finish(const CornerSets& corners, const Tensor3D& seg, const PipelineConfig& cfg) {
    std::vector<CandidateBox> scored = score_and_filter(sample_and_group(corners, cfg), seg, cfg);
    std::vector<Detection> dets;
    dets.reserve(scored.size());
    for (const CandidateBox& c : scored) dets.push_back({c.rect, c.seg_score});
    return rotated_nms(dets, cfg.final_nms_iou);
}

}  // namespace

std::vector<Detection> detect(const CornerSets& corners, const Tensor3D& seg, const PipelineConfig& cfg) {
    cfg.validate();
    CornerSets filtered = threshold_corners(corners, cfg.corner_score_threshold);
    for (auto& set : filtered) set = corner_nms(std::move(set), cfg.corner_nms_iou);
    return finish(filtered, seg, cfg);
}

std::vector<Detection> detect(std::span<const LayerMaps> maps, const DefaultBoxConfig& boxes, const Tensor3D& seg,
                              const PipelineConfig& cfg) {
    return finish(decode_corners(maps, boxes, cfg), seg, cfg);
}

}  // namespace cornerseg
