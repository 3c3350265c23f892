#include "cornerseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "cornerseg/error.hpp"
#include "cornerseg/geometry.hpp"
#include "cornerseg/targets.hpp"

namespace cornerseg {

namespace {

double point_segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    return norm(p - (a + ab * t));
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

bool NoiseConfig::is_zero() const {
    return corner_jitter_sigma == 0.0 && corner_score_noise == 0.0 &&
           std::all_of(drop_prob.begin(), drop_prob.end(), [](double p) { return p == 0.0; }) &&
           spurious_rate == 0.0 && seg_flip_rate == 0.0;
}

void NoiseConfig::validate() const {
    if (!(corner_jitter_sigma >= 0.0)) throw ConfigError("corner_jitter_sigma must be non-negative");
    if (!(corner_score_noise >= 0.0)) throw ConfigError("corner_score_noise must be non-negative");
    for (double p : drop_prob) {
        if (!probability(p)) throw ConfigError("drop_prob must lie in [0, 1]");
    }
    if (!probability(spurious_rate)) throw ConfigError("spurious_rate must lie in [0, 1]");
    if (!probability(seg_flip_rate)) throw ConfigError("seg_flip_rate must lie in [0, 1]");
}

void SynthConfig::validate() const {
    if (image_width <= 0 || image_height <= 0) throw ConfigError("synth image size must be positive");
    if (min_boxes < 0 || max_boxes < min_boxes) throw ConfigError("synth box count range is empty");
    if (!(theta_min_deg <= theta_max_deg)) throw ConfigError("synth theta range is empty");
    if (!(short_side_min >= 8.0)) throw ConfigError("synth short_side_min must be >= 8 px");
    if (!(short_side_max >= short_side_min)) throw ConfigError("synth short-side range is empty");
    if (!(aspect_min >= 1.0) || !(aspect_max >= aspect_min)) throw ConfigError("synth aspect range is invalid");
    if (!(min_separation >= 0.0) || !(margin >= 0.0)) throw ConfigError("synth separation and margin must be >= 0");
    if (!probability(max_corner_square_iou)) throw ConfigError("max_corner_square_iou must lie in [0, 1]");
    if (g < 1) throw ConfigError("synth g must be >= 1");
    if (max_attempts_per_box < 1) throw ConfigError("max_attempts_per_box must be >= 1");
    noise.validate();
}

double polygon_distance(const RotatedRect& a, const RotatedRect& b) {
    if (intersection_area(a, b) > 0.0) return 0.0;
    for (const Point& p : a.corners) {
        if (contains(b, p)) return 0.0;
    }
    for (const Point& p : b.corners) {
        if (contains(a, p)) return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            best = std::min(best, point_segment_distance(a.corners[i], b.corners[j], b.corners[(j + 1) % 4]));
            best = std::min(best, point_segment_distance(b.corners[i], a.corners[j], a.corners[(j + 1) % 4]));
        }
    }
    return best;
}

SynthScene generate_scene(const SynthConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> count_dist(cfg.min_boxes, cfg.max_boxes);
    std::uniform_real_distribution<double> ss_dist(cfg.short_side_min, cfg.short_side_max);
    std::uniform_real_distribution<double> aspect_dist(cfg.aspect_min, cfg.aspect_max);
    std::uniform_real_distribution<double> theta_dist(cfg.theta_min_deg, cfg.theta_max_deg);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int count = count_dist(rng);
    SynthScene scene;
    scene.annotation.image_width = cfg.image_width;
    scene.annotation.image_height = cfg.image_height;

    for (int b = 0; b < count; ++b) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_attempts_per_box && !placed; ++attempt) {
            const double ss = ss_dist(rng);
            const double long_side = ss * aspect_dist(rng);
            const double theta = theta_dist(rng) * std::numbers::pi / 180.0;
            const double cx_unit = unit(rng);
            const double cy_unit = unit(rng);

            const double c = std::abs(std::cos(theta));
            const double s = std::abs(std::sin(theta));
            const double half_x = 0.5 * (long_side * c + ss * s);
            const double half_y = 0.5 * (long_side * s + ss * c);
            const double x_lo = cfg.margin + half_x;
            const double x_hi = cfg.image_width - cfg.margin - half_x;
            const double y_lo = cfg.margin + half_y;
            const double y_hi = cfg.image_height - cfg.margin - half_y;
            if (x_lo > x_hi || y_lo > y_hi) continue;

            const RotatedRect rect = canonical_corner_order(from_center_form(
                x_lo + cx_unit * (x_hi - x_lo), y_lo + cy_unit * (y_hi - y_lo), long_side, ss, theta));
            const auto squares = corner_squares(rect);

            bool ok = true;
            for (const RotatedRect& other : scene.annotation.boxes) {
                if (polygon_distance(rect, other) < cfg.min_separation) {
                    ok = false;
                    break;
                }
                const auto other_squares = corner_squares(other);
                for (int t = 0; t < 4 && ok; ++t) {
                    ok = axis_aligned_iou(squares[t].box(), other_squares[t].box()) <= cfg.max_corner_square_iou;
                }
                if (!ok) break;
            }
            if (!ok) continue;
            scene.annotation.boxes.push_back(rect);
            placed = true;
        }
        if (!placed) {
            throw SynthError("could not place box " + std::to_string(b + 1) + " of " + std::to_string(count) +
                             " after " + std::to_string(cfg.max_attempts_per_box) + " attempts (seed " +
                             std::to_string(seed) + ")");
        }
    }

    for (const RotatedRect& rect : scene.annotation.boxes) {
        const double ss = rect.short_side();
        for (CornerType t : kCornerTypes) {
            scene.corners[static_cast<int>(t)].push_back({t, rect.corner(t), ss, 1.0});
        }
    }
    scene.masks = ps_masks(scene.annotation.boxes, cfg.g, static_cast<std::size_t>(cfg.image_height),
                           static_cast<std::size_t>(cfg.image_width));
    return scene;
}

SynthScene corrupt(const SynthScene& scene, const NoiseConfig& noise, std::uint64_t seed, double short_side_min,
                   double short_side_max) {
    noise.validate();
    if (noise.is_zero()) return scene;
    if (!(short_side_min > 0.0) || short_side_max < short_side_min) {
        throw ConfigError("spurious corner short-side range is invalid");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SynthScene out;
    out.annotation = scene.annotation;
    std::vector<CornerDetection> spurious;
    for (std::size_t t = 0; t < 4; ++t) {
        for (const CornerDetection& c : scene.corners[t]) {
            const bool drop = unit(rng) < noise.drop_prob[t];
            const bool spawn = unit(rng) < noise.spurious_rate;
            CornerDetection moved = c;
            if (noise.corner_jitter_sigma > 0.0) {
                moved.position.x += noise.corner_jitter_sigma * gauss(rng);
                moved.position.y += noise.corner_jitter_sigma * gauss(rng);
            }
            if (noise.corner_score_noise > 0.0) {
                moved.score = std::clamp(moved.score - std::abs(noise.corner_score_noise * gauss(rng)), 0.0, 1.0);
            }
            if (!drop) out.corners[t].push_back(moved);
            if (spawn) {
                CornerDetection fake;
                fake.type = kCornerTypes[static_cast<std::size_t>(unit(rng) * 4.0) % 4];
                fake.position = {unit(rng) * scene.annotation.image_width, unit(rng) * scene.annotation.image_height};
                fake.short_side = short_side_min + unit(rng) * (short_side_max - short_side_min);
                fake.score = 0.5 + 0.5 * unit(rng);
                spurious.push_back(fake);
            }
        }
    }
    for (const CornerDetection& fake : spurious) out.corners[static_cast<int>(fake.type)].push_back(fake);

    out.masks = scene.masks;
    if (noise.seg_flip_rate > 0.0) {
        auto data = out.masks.data();
        if (noise.seg_flip_rate >= 1.0) {
            for (float& v : data) v = 1.0f - v;
        } else {
            // Gaps between flipped pixels are geometric.
            std::geometric_distribution<long long> gap(noise.seg_flip_rate);
            for (long long i = gap(rng); i < static_cast<long long>(data.size()); i += 1 + gap(rng)) {
                data[static_cast<std::size_t>(i)] = 1.0f - data[static_cast<std::size_t>(i)];
            }
        }
    }
    return out;
}

}  // namespace cornerseg
