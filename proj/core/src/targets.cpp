#include "cornerseg/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cornerseg/error.hpp"

namespace cornerseg {

RotatedRect canonical_corner_order(std::span<const Point, 4> quad) {
    const Point c{(quad[0].x + quad[1].x + quad[2].x + quad[3].x) / 4.0,
                  (quad[0].y + quad[1].y + quad[2].y + quad[3].y) / 4.0};
    std::array<Point, 4> ring{quad[0], quad[1], quad[2], quad[3]};
    // Increasing atan2 in y-down coordinates walks the ring clockwise on screen.
    std::sort(ring.begin(), ring.end(), [c](Point a, Point b) {
        return std::atan2(a.y - c.y, a.x - c.x) < std::atan2(b.y - c.y, b.x - c.x);
    });

    constexpr double kTieTolerance = 1e-9;
    int best = 0;
    double best_abs_angle = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
        const Point tl = ring[k];
        const Point tr = ring[(k + 1) % 4];
        const double abs_angle = std::abs(std::atan2(tr.y - tl.y, tr.x - tl.x));
        if (abs_angle < best_abs_angle - kTieTolerance) {
            best = k;
            best_abs_angle = abs_angle;
        } else if (abs_angle <= best_abs_angle + kTieTolerance) {
            const Point cur = ring[best];
            if (tl.y < cur.y || (tl.y == cur.y && tl.x < cur.x)) {
                best = k;
                best_abs_angle = std::min(best_abs_angle, abs_angle);
            }
        }
    }
    return RotatedRect{{ring[best], ring[(best + 1) % 4], ring[(best + 2) % 4], ring[(best + 3) % 4]}};
}

RotatedRect canonical_corner_order(const RotatedRect& r) {
    return canonical_corner_order(std::span<const Point, 4>(r.corners));
}

std::array<CornerSquare, 4> corner_squares(const RotatedRect& r) {
    const double side = r.short_side();
    if (!(side > 0.0)) throw DegenerateGeometry("corner squares need a positive short side");
    std::array<CornerSquare, 4> out;
    for (CornerType t : kCornerTypes) {
        out[static_cast<int>(t)] = CornerSquare{t, r.corner(t), side};
    }
    return out;
}

Tensor3D ps_masks(std::span<const RotatedRect> boxes, int g, std::size_t height, std::size_t width) {
    if (g < 1) throw ConfigError("position-sensitive grid order must be >= 1");
    Tensor3D masks(static_cast<std::size_t>(g) * g, height, width);
    if (height == 0 || width == 0) return masks;

    for (const RotatedRect& box : boxes) {
        const Point origin = box.tl();
        const Point u = box.tr() - origin;
        const Point v = box.bl() - origin;
        const double det = cross(u, v);
        if (det == 0.0) continue;
        const double s_tol = 1e-9 / norm(u);
        const double t_tol = 1e-9 / norm(v);

        const AxisAlignedBox aabb = bounding_box(box);
        const long x0 = std::max(0L, static_cast<long>(std::floor(aabb.x_min - 0.5)));
        const long y0 = std::max(0L, static_cast<long>(std::floor(aabb.y_min - 0.5)));
        const long x1 = std::min(static_cast<long>(width) - 1, static_cast<long>(std::ceil(aabb.x_max - 0.5)));
        const long y1 = std::min(static_cast<long>(height) - 1, static_cast<long>(std::ceil(aabb.y_max - 0.5)));

        for (long py = y0; py <= y1; ++py) {
            for (long px = x0; px <= x1; ++px) {
                const Point d = Point{px + 0.5, py + 0.5} - origin;
                const double s = cross(d, v) / det;
                const double t = cross(u, d) / det;
                if (s < -s_tol || s > 1.0 + s_tol || t < -t_tol || t > 1.0 + t_tol) continue;
                const int col = std::clamp(static_cast<int>(std::floor(s * g)), 0, g - 1);
                const int row = std::clamp(static_cast<int>(std::floor(t * g)), 0, g - 1);
                masks.at(static_cast<std::size_t>(row * g + col), py, px) = 1.0f;
            }
        }
    }
    return masks;
}

std::vector<FeatureLayer> DefaultBoxConfig::default_layers() {
    // F3's scale list keeps its published (non-monotone) order.
    return {
        {"F3", 4, {4, 8, 6, 10, 12, 16}},
        {"F4", 8, {20, 24, 28, 32}},
        {"F7", 16, {36, 40, 44, 48}},
        {"F8", 32, {56, 64, 72, 80}},
        {"F9", 64, {88, 96, 104, 112}},
        {"F10", 128, {124, 136, 148, 160}},
        {"F11", 256, {184, 208, 232, 256}},
    };
}

void DefaultBoxConfig::validate() const {
    if (input_width <= 0 || input_height <= 0) throw ConfigError("input size must be positive");
    if (layers.empty()) throw ConfigError("at least one feature layer is required");
    for (const FeatureLayer& layer : layers) {
        if (layer.stride <= 0) throw ConfigError("layer " + layer.name + ": stride must be positive");
        if (input_width % layer.stride != 0 || input_height % layer.stride != 0) {
            throw ConfigError("layer " + layer.name + ": input size " + std::to_string(input_width) + "x" +
                              std::to_string(input_height) + " is not divisible by stride " +
                              std::to_string(layer.stride));
        }
        if (layer.scales.empty()) throw ConfigError("layer " + layer.name + ": no scales");
        for (double s : layer.scales) {
            if (!(s > 0.0)) throw ConfigError("layer " + layer.name + ": scales must be positive");
        }
    }
}

std::vector<DefaultBox> generate_default_boxes(const DefaultBoxConfig& cfg) {
    cfg.validate();
    std::vector<DefaultBox> boxes;
    for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
        const FeatureLayer& layer = cfg.layers[l];
        const int rows = cfg.input_height / layer.stride;
        const int cols = cfg.input_width / layer.stride;
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const Point center{(c + 0.5) * layer.stride, (r + 0.5) * layer.stride};
                for (std::size_t k = 0; k < layer.scales.size(); ++k) {
                    boxes.push_back({static_cast<int>(l), r, c, static_cast<int>(k), center, layer.scales[k]});
                }
            }
        }
    }
    return boxes;
}

std::size_t default_box_index(const DefaultBoxConfig& cfg, int layer, int row, int col, int scale) {
    std::size_t offset = 0;
    for (int l = 0; l < layer; ++l) {
        const FeatureLayer& f = cfg.layers[l];
        offset += static_cast<std::size_t>(cfg.input_height / f.stride) * (cfg.input_width / f.stride) *
                  f.scales.size();
    }
    const FeatureLayer& f = cfg.layers[layer];
    const std::size_t cols = cfg.input_width / f.stride;
    return offset + (static_cast<std::size_t>(row) * cols + col) * f.scales.size() + scale;
}

std::vector<CornerMatch> MatchResult::positives(std::span<const CornerSquare> squares) const {
    std::vector<CornerMatch> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        const auto sq = static_cast<std::size_t>(labels[i]);
        out.push_back({i / 4, sq, squares[sq].type, overlaps[i]});
    }
    return out;
}

std::vector<std::size_t> MatchResult::negatives() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) out.push_back(i);
    }
    return out;
}

std::size_t MatchResult::num_positives() const {
    return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](long l) { return l >= 0; }));
}

MatchResult match(std::span<const DefaultBox> boxes, std::span<const CornerSquare> squares, double threshold) {
    MatchResult result;
    result.num_boxes = boxes.size();
    result.labels.assign(boxes.size() * 4, -1);
    result.overlaps.assign(boxes.size() * 4, 0.0);

    std::vector<AxisAlignedBox> square_boxes;
    square_boxes.reserve(squares.size());
    for (const CornerSquare& s : squares) square_boxes.push_back(s.box());

    // Per square: best default box, for the forced match.
    std::vector<std::size_t> best_box(squares.size(), 0);
    std::vector<double> best_iou(squares.size(), 0.0);

    for (std::size_t b = 0; b < boxes.size(); ++b) {
        const AxisAlignedBox db = boxes[b].box();
        for (std::size_t j = 0; j < squares.size(); ++j) {
            if (!overlaps(db, square_boxes[j])) continue;
            const double iou = axis_aligned_iou(db, square_boxes[j]);
            if (iou <= 0.0) continue;
            const std::size_t slot = b * 4 + static_cast<std::size_t>(squares[j].type);
            if (iou > result.overlaps[slot]) {
                result.overlaps[slot] = iou;
                result.labels[slot] = static_cast<long>(j);
            }
            if (iou > best_iou[j]) {
                best_iou[j] = iou;
                best_box[j] = b;
            }
        }
    }

    for (std::size_t slot = 0; slot < result.labels.size(); ++slot) {
        if (result.overlaps[slot] < threshold) result.labels[slot] = -1;
    }

    // Forced matches; when two squares of one type want the same slot the
    // higher IoU wins, then the lower square index.
    std::vector<double> forced_iou(result.labels.size(), -1.0);
    for (std::size_t j = 0; j < squares.size(); ++j) {
        if (best_iou[j] <= 0.0) continue;
        const std::size_t slot = best_box[j] * 4 + static_cast<std::size_t>(squares[j].type);
        if (best_iou[j] > forced_iou[slot]) {
            forced_iou[slot] = best_iou[j];
            result.labels[slot] = static_cast<long>(j);
            result.overlaps[slot] = best_iou[j];
        }
    }
    return result;
}

OffsetTarget encode_offsets(const DefaultBox& b, const CornerSquare& c) {
    if (!(b.side > 0.0) || !(c.side > 0.0)) {
        throw InvalidBox("offset encoding needs positive default-box and corner-square sides");
    }
    return {(b.center.x - c.center.x) / b.side, (b.center.y - c.center.y) / b.side, std::log(b.side / c.side)};
}

CornerSquare decode_offsets(const DefaultBox& b, const OffsetTarget& o, CornerType type) {
    return {type, {b.center.x - o.dx * b.side, b.center.y - o.dy * b.side}, b.side / std::exp(o.dss)};
}

}  // namespace cornerseg
