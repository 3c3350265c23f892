#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cornerseg/error.hpp"
#include "cornerseg/geometry.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cornerseg;

namespace {

void expect_point(Point p, double x, double y, double tol = 1e-12) {
    EXPECT_NEAR(p.x, x, tol);
    EXPECT_NEAR(p.y, y, tol);
}

}  // namespace

TEST(CenterForm, AxisAlignedCorners) {
    const RotatedRect r = from_center_form(10, 10, 4, 2, 0);
    expect_point(r.tl(), 8, 9);
    expect_point(r.tr(), 12, 9);
    expect_point(r.br(), 12, 11);
    expect_point(r.bl(), 8, 11);
}

TEST(CenterForm, FortyFiveDegreesMatchesHandRotation) {
    // Rotating (-1,-1), (1,-1), (1,1), (-1,1) by 45 degrees.
    const double s = std::numbers::sqrt2;
    const RotatedRect r = from_center_form(0, 0, 2, 2, std::numbers::pi / 4);
    expect_point(r.tl(), 0, -s);
    expect_point(r.tr(), s, 0);
    expect_point(r.br(), 0, s);
    expect_point(r.bl(), -s, 0);
}

TEST(CenterForm, UnitBoxRoundTripsExactly) {
    const CenterForm c = to_center_form(from_center_form(5, 5, 1, 1, 0));
    EXPECT_EQ(c.x, 5);
    EXPECT_EQ(c.y, 5);
    EXPECT_EQ(c.w, 1);
    EXPECT_EQ(c.h, 1);
    EXPECT_EQ(c.theta, 0);
}

TEST(CenterForm, RejectsNonPositiveSides) {
    EXPECT_THROW(from_center_form(0, 0, 0, 1, 0), InvalidBox);
    EXPECT_THROW(from_center_form(0, 0, 1, -2, 0), InvalidBox);
}

TEST(CenterForm, RandomRoundTrip) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double x = gen::uniform(rng, -500, 500), y = gen::uniform(rng, -500, 500);
        const double w = gen::uniform(rng, 0.5, 300), h = gen::uniform(rng, 0.5, 300);
        const double theta = gen::uniform(rng, -std::numbers::pi / 2, std::numbers::pi / 2);
        const CenterForm c = to_center_form(from_center_form(x, y, w, h, theta));
        EXPECT_NEAR(c.x, x, 1e-9);
        EXPECT_NEAR(c.y, y, 1e-9);
        EXPECT_NEAR(c.w, w, 1e-9);
        EXPECT_NEAR(c.h, h, 1e-9);
        EXPECT_NEAR(c.theta, theta, 1e-9);
    }
}

TEST(MinAreaRect, AxisAlignedCornersGiveSameRectangle) {
    const RotatedRect r = from_center_form(20, 30, 16, 6, 0);
    const RotatedRect m = min_area_rect(r.corners);
    for (int i = 0; i < 4; ++i) expect_point(m.corners[i], r.corners[i].x, r.corners[i].y, 1e-9);
}

TEST(MinAreaRect, RecoversRotatedRectangle) {
    const RotatedRect r = from_center_form(50, 40, 30, 12, std::numbers::pi / 6);
    const RotatedRect m = min_area_rect(r.corners);
    EXPECT_NEAR(m.area(), r.area(), 1e-6);
    EXPECT_NEAR(rotated_iou(m, r), 1.0, 1e-9);
}

TEST(MinAreaRect, RandomQuadIsCoveredAndNoLargerThanItsBoundingBox) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        std::vector<Point> pts;
        const int n = gen::uniform_int(rng, 3, 12);
        for (int k = 0; k < n; ++k) pts.push_back({gen::uniform(rng, 0, 100), gen::uniform(rng, 0, 100)});
        if (std::abs(signed_area(convex_hull(pts))) < 1e-6) continue;
        const RotatedRect m = min_area_rect(pts);
        EXPECT_LE(m.area(), bounding_box(pts).area() + 1e-9);
        EXPECT_TRUE(is_rectangle(m));
        for (const Point& p : pts) {
            // Points on the boundary may fall a rounding error outside.
            const RotatedRect grown = from_center_form(m.center().x, m.center().y, m.width() + 1e-7,
                                                       m.height() + 1e-7, to_center_form(m).theta);
            EXPECT_TRUE(contains(grown, p));
        }
    }
}

TEST(MinAreaRect, DegenerateInputThrows) {
    const std::vector<Point> collinear = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    EXPECT_THROW(min_area_rect(collinear), DegenerateGeometry);
    const std::vector<Point> two = {{0, 0}, {1, 0}};
    EXPECT_THROW(min_area_rect(two), DegenerateGeometry);
}

TEST(Contains, CenterAndBoundaryInsideFarPointOutside) {
    const RotatedRect r = from_center_form(3, 4, 10, 5, 0.3);
    EXPECT_TRUE(contains(r, r.center()));
    const Point mid = (r.tl() + r.tr()) * 0.5;
    EXPECT_TRUE(contains(r, mid));
    EXPECT_TRUE(contains(r, r.br()));
    const AxisAlignedBox bb = bounding_box(r);
    EXPECT_FALSE(contains(r, {bb.x_max + 1, bb.y_max + 1}));
}

TEST(Contains, IndependentOfCornerWinding) {
    const RotatedRect r = from_center_form(0, 0, 4, 2, 0.7);
    const RotatedRect reversed{{r.corners[3], r.corners[2], r.corners[1], r.corners[0]}};
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const Point p{gen::uniform(rng, -3, 3), gen::uniform(rng, -3, 3)};
        EXPECT_EQ(contains(r, p), contains(reversed, p));
    }
}

TEST(RotatedIou, IdenticalAndDisjoint) {
    const RotatedRect a = from_center_form(10, 10, 8, 4, 0.2);
    EXPECT_NEAR(rotated_iou(a, a), 1.0, 1e-12);
    EXPECT_EQ(rotated_iou(a, translate(a, {100, 0})), 0.0);
}

TEST(RotatedIou, UnitSquareAgainstItsFortyFiveDegreeRotation) {
    const RotatedRect a = from_center_form(0, 0, 1, 1, 0);
    const RotatedRect b = from_center_form(0, 0, 1, 1, std::numbers::pi / 4);
    // Octagon of area 2(sqrt2 - 1) over union 2 - 2(sqrt2 - 1).
    const double inter = 2.0 * (std::numbers::sqrt2 - 1.0);
    EXPECT_NEAR(intersection_area(a, b), inter, 1e-12);
    EXPECT_NEAR(rotated_iou(a, b), inter / (2.0 - inter), 1e-12);
    EXPECT_NEAR(rotated_iou(a, b), 1.0 / std::numbers::sqrt2, 1e-12);
    std::mt19937_64 rng(1);
    EXPECT_NEAR(oracle::monte_carlo_iou(a, b, 400, rng), 1.0 / std::numbers::sqrt2, 5e-3);
}

TEST(RotatedIou, MatchesClosedFormForAxisAlignedPairs) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        const RotatedRect a = from_center_form(gen::uniform(rng, 0, 20), gen::uniform(rng, 0, 20),
                                               gen::uniform(rng, 1, 15), gen::uniform(rng, 1, 15), 0);
        const RotatedRect b = from_center_form(gen::uniform(rng, 0, 20), gen::uniform(rng, 0, 20),
                                               gen::uniform(rng, 1, 15), gen::uniform(rng, 1, 15), 0);
        EXPECT_NEAR(rotated_iou(a, b), oracle::axis_aligned_rect_iou(a, b), 1e-12);
    }
}

TEST(RotatedIou, SymmetricBoundedAndRigidMotionInvariant) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 2000; ++i) {
        const RotatedRect a = gen::rect(rng, 0, 50, 1, 30);
        const RotatedRect b = gen::rect_near(rng, a, 1, 30);
        const double iou = rotated_iou(a, b);
        EXPECT_EQ(iou, rotated_iou(b, a));
        EXPECT_GE(iou, 0.0);
        EXPECT_LE(iou, 1.0);
        const Point origin{gen::uniform(rng, -10, 10), gen::uniform(rng, -10, 10)};
        const double angle = gen::uniform(rng, -3, 3);
        const Point shift{gen::uniform(rng, -100, 100), gen::uniform(rng, -100, 100)};
        const double moved = rotated_iou(translate(rotate_about(a, origin, angle), shift),
                                         translate(rotate_about(b, origin, angle), shift));
        EXPECT_NEAR(moved, iou, 1e-9);
    }
}

TEST(RotatedIou, NestedRectangleGivesAreaRatio) {
    const RotatedRect outer = from_center_form(0, 0, 10, 6, 0.4);
    const RotatedRect inner = from_center_form(0, 0, 5, 3, 0.4);
    EXPECT_NEAR(rotated_iou(outer, inner), 0.25, 1e-12);
}

TEST(ClipConvex, SquareClippedByHalfOverlap) {
    const std::vector<Point> a = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    const std::vector<Point> b = {{1, 0}, {3, 0}, {3, 2}, {1, 2}};
    EXPECT_NEAR(std::abs(signed_area(clip_convex(a, b))), 2.0, 1e-12);
}

TEST(ConvexHull, DropsInteriorPointsAndIsCounterClockwiseInShoelaceSense) {
    const std::vector<Point> pts = {{0, 0}, {4, 0}, {4, 4}, {0, 4}, {2, 2}, {1, 3}};
    const std::vector<Point> hull = convex_hull(pts);
    EXPECT_EQ(hull.size(), 4u);
    EXPECT_NEAR(signed_area(hull), 16.0, 1e-12);
}

TEST(CornerTypeNames, RoundTrip) {
    for (CornerType t : kCornerTypes) EXPECT_EQ(corner_type_from_name(corner_type_name(t)), t);
    EXPECT_THROW(corner_type_from_name("XX"), std::invalid_argument);
}

TEST(AxisAlignedIou, HalfShiftedSquares) {
    const AxisAlignedBox a{0, 0, 10, 10};
    const AxisAlignedBox b{5, 0, 15, 10};
    EXPECT_NEAR(axis_aligned_iou(a, b), 50.0 / 150.0, 1e-15);
}
