#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cornerseg::oracle {

namespace {

double shoelace(const RotatedRect& r) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point& p = r.corners[i];
        const Point& q = r.corners[(i + 1) % 4];
        s += p.x * q.y - q.x * p.y;
    }
    return 0.5 * s;
}

bool inside(const RotatedRect& r, double orientation, double x, double y) {
    for (int i = 0; i < 4; ++i) {
        const Point& p = r.corners[i];
        const Point& q = r.corners[(i + 1) % 4];
        const double c = (q.x - p.x) * (y - p.y) - (q.y - p.y) * (x - p.x);
        if (orientation * c < 0.0) return false;
    }
    return true;
}

}  // namespace

double monte_carlo_iou(const RotatedRect& a, const RotatedRect& b, int n, std::mt19937_64& rng) {
    double x0 = a.corners[0].x, x1 = x0, y0 = a.corners[0].y, y1 = y0;
    for (const RotatedRect* r : {&a, &b}) {
        for (const Point& p : r->corners) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
    }
    const double oa = shoelace(a) >= 0.0 ? 1.0 : -1.0;
    const double ob = shoelace(b) >= 0.0 ? 1.0 : -1.0;
    const double dx = (x1 - x0) / n;
    const double dy = (y1 - y0) / n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long in_a = 0, in_b = 0, both = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = x0 + (i + u(rng)) * dx;
            const double y = y0 + (j + u(rng)) * dy;
            const bool ia = inside(a, oa, x, y);
            const bool ib = inside(b, ob, x, y);
            in_a += ia;
            in_b += ib;
            both += ia && ib;
        }
    }
    const long uni = in_a + in_b - both;
    return uni > 0 ? static_cast<double>(both) / static_cast<double>(uni) : 0.0;
}

double axis_aligned_rect_iou(const RotatedRect& a, const RotatedRect& b) {
    auto extent = [](const RotatedRect& r) {
        double x0 = r.corners[0].x, x1 = x0, y0 = r.corners[0].y, y1 = y0;
        for (const Point& p : r.corners) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        return std::array<double, 4>{x0, y0, x1, y1};
    };
    const auto ea = extent(a);
    const auto eb = extent(b);
    const double iw = std::max(0.0, std::min(ea[2], eb[2]) - std::max(ea[0], eb[0]));
    const double ih = std::max(0.0, std::min(ea[3], eb[3]) - std::max(ea[1], eb[1]));
    const double inter = iw * ih;
    const double uni = (ea[2] - ea[0]) * (ea[3] - ea[1]) + (eb[2] - eb[0]) * (eb[3] - eb[1]) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double literal_rps_pool(const RotatedRect& box, const Tensor3D& seg, int g) {
    const Point tl = box.corners[0];
    const Point u = box.corners[1] - tl;
    const Point v = box.corners[3] - tl;
    auto grid = [&](int r, int c) {
        return tl + u * (static_cast<double>(c) / g) + v * (static_cast<double>(r) / g);
    };
    double total = 0.0;
    for (int r = 0; r < g; ++r) {
        for (int c = 0; c < g; ++c) {
            const RotatedRect bin{{grid(r, c), grid(r, c + 1), grid(r + 1, c + 1), grid(r + 1, c)}};
            const std::size_t channel = static_cast<std::size_t>(r * g + c);
            double sum = 0.0;
            long count = 0;
            for (std::size_t y = 0; y < seg.height(); ++y) {
                for (std::size_t x = 0; x < seg.width(); ++x) {
                    if (contains(bin, {static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5})) {
                        sum += seg.at(channel, y, x);
                        ++count;
                    }
                }
            }
            total += count > 0 ? sum / static_cast<double>(count) : 0.0;
        }
    }
    return total / static_cast<double>(g * g);
}

std::vector<Detection> quadratic_nms(std::vector<Detection> boxes, double iou_threshold) {
    std::stable_sort(boxes.begin(), boxes.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        return lexicographic_less(a.rect, b.rect);
    });
    std::vector<Detection> kept;
    for (const Detection& d : boxes) {
        bool keep = true;
        for (const Detection& k : kept) {
            if (rotated_iou(d.rect, k.rect) > iou_threshold) {
                keep = false;
                break;
            }
        }
        if (keep) kept.push_back(d);
    }
    return kept;
}

OhemSelection sorted_ohem(std::span<const double> losses, std::span<const int> labels, std::size_t ratio,
                          std::size_t zero_positive_floor) {
    OhemSelection s;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            s.indices.push_back(i);
            ++s.num_positives;
        } else {
            negatives.push_back(i);
        }
    }
    std::stable_sort(negatives.begin(), negatives.end(),
                     [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
    s.no_positives = s.num_positives == 0;
    const std::size_t want = s.no_positives ? std::max<std::size_t>(1, zero_positive_floor) : ratio * s.num_positives;
    s.num_negatives = std::min(want, negatives.size());
    s.indices.insert(s.indices.end(), negatives.begin(),
                     negatives.begin() + static_cast<std::ptrdiff_t>(s.num_negatives));
    std::sort(s.indices.begin(), s.indices.end());
    return s;
}

std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double h) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = f(x);
        x[i] = saved - h;
        const double down = f(x);
        x[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric, double floor) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

RuleCheck check_grouping_rules(const CornerDetection& first, const CornerDetection& second,
                               const PipelineConfig& cfg) {
    using enum CornerType;
    RuleCheck r;
    const Point a = first.position;
    const Point b = second.position;
    const CornerType s = first.type;
    const CornerType t = second.type;
    if (s == TL && t == TR) {
        r.allowed_pair = true;
        r.relative_position = a.x < b.x;
    } else if (s == TR && t == BR) {
        r.allowed_pair = true;
        r.relative_position = a.y < b.y;
    } else if (s == BL && t == BR) {
        r.allowed_pair = true;
        r.relative_position = a.x < b.x;
    } else if (s == TL && t == BL) {
        r.allowed_pair = true;
        r.relative_position = a.y < b.y;
    }
    const double lo = std::min(first.short_side, second.short_side);
    const double hi = std::max(first.short_side, second.short_side);
    r.ratio = lo > 0.0 && hi / lo <= cfg.ss_ratio_max;
    const double edge = std::hypot(b.x - a.x, b.y - a.y);
    const double extent = 0.5 * (first.short_side + second.short_side);
    r.short_side = std::min(edge, extent) > cfg.min_short_side;
    return r;
}

}  // namespace cornerseg::oracle
