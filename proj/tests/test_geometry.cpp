#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "geometry.hpp"
#include "testutil.hpp"

using fsd::BBox;
using fsd::BIWeights;
using fsdtest::random_box;

// Pixel-counting IoU oracle for integer-coordinate boxes: counts unit lattice
// cells covered by each box. Independent of the corner-form implementation.
static double iou_pixel_oracle(const BBox& a, const BBox& b) {
    long ax1 = std::lround(a.x1()), ay1 = std::lround(a.y1());
    long ax2 = std::lround(a.x2()), ay2 = std::lround(a.y2());
    long bx1 = std::lround(b.x1()), by1 = std::lround(b.y1());
    long bx2 = std::lround(b.x2()), by2 = std::lround(b.y2());
    long inter = 0, only_a = 0, only_b = 0;
    long lo_x = std::min(ax1, bx1), hi_x = std::max(ax2, bx2);
    long lo_y = std::min(ay1, by1), hi_y = std::max(ay2, by2);
    for (long y = lo_y; y < hi_y; ++y)
        for (long x = lo_x; x < hi_x; ++x) {
            bool in_a = x >= ax1 && x < ax2 && y >= ay1 && y < ay2;
            bool in_b = x >= bx1 && x < bx2 && y >= by1 && y < by2;
            if (in_a && in_b) ++inter;
            else if (in_a) ++only_a;
            else if (in_b) ++only_b;
        }
    long uni = inter + only_a + only_b;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

TEST_CASE("area: direct products") {
    CHECK(fsd::area(BBox(0, 0, 2, 3)) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(fsd::area(BBox(5, 5, 1, 1)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fsd::area(BBox(1.5, 2, 0.4, 2.5)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("area: degenerate boxes rejected at construction") {
    CHECK_THROWS_AS(BBox(0, 0, 0, 1), fsd::Error);
    CHECK_THROWS_AS(BBox(0, 0, 1, -2), fsd::Error);
    CHECK_THROWS_AS(BBox(0, 0, std::nan(""), 1), fsd::Error);
    CHECK_THROWS_AS(BBox(std::numeric_limits<double>::infinity(), 0, 1, 1), fsd::Error);
}

TEST_CASE("iou: identity, disjoint, worked partial overlap") {
    BBox a(1, 1, 2, 2);
    CHECK(fsd::iou(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fsd::iou(a, BBox(10, 10, 2, 2)) == doctest::Approx(0.0));
    // corners: [0,2]x[0,2] vs [1,3]x[0,2] -> intersection 2, union 6
    CHECK(fsd::iou(a, BBox(2, 1, 2, 2)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("iou: zero-width touching boxes do not intersect") {
    CHECK(fsd::iou(BBox(0, 0, 2, 2), BBox(2, 0, 2, 2)) == 0.0);
}

TEST_CASE("iou matches pixel-count oracle on random integer boxes") {
    fsd::Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        // even sizes keep centers integral so corners land on the lattice
        double w1 = 2 * rng.uniform_int(1, 8), h1 = 2 * rng.uniform_int(1, 8);
        double w2 = 2 * rng.uniform_int(1, 8), h2 = 2 * rng.uniform_int(1, 8);
        BBox a(rng.uniform_int(-10, 10), rng.uniform_int(-10, 10), w1, h1);
        BBox b(rng.uniform_int(-10, 10), rng.uniform_int(-10, 10), w2, h2);
        CHECK(fsd::iou(a, b) == doctest::Approx(iou_pixel_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("area_diff_norm: worked values") {
    CHECK(fsd::area_diff_norm(BBox(0, 0, 1, 2), BBox(50, -3, 2, 1)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fsd::area_diff_norm(BBox(0, 0, 1, 2), BBox(0, 0, 2, 2)) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fsd::area_diff_norm(BBox(0, 0, 1, 1), BBox(0, 0, 10, 10)) ==
          doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("burning_intensity: worked values") {
    BBox a(1, 1, 2, 2);
    CHECK(fsd::burning_intensity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fsd::burning_intensity(BBox(0, 0, 2, 2), BBox(100, 0, 2, 2)) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fsd::burning_intensity(a, BBox(2, 1, 2, 2)) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(fsd::burning_intensity(a, BBox(2, 1, 2, 2), BIWeights(1.0, 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("burning_intensity: invalid weights rejected") {
    CHECK_THROWS_AS(BIWeights(0.6, 0.6), fsd::Error);
    CHECK_THROWS_AS(BIWeights(-0.1, 1.1), fsd::Error);
    BIWeights w;
    w.w1 = 0.9;  // bypass constructor validation, op must re-check
    w.w2 = 0.2;
    CHECK_THROWS_AS(fsd::burning_intensity(BBox(0, 0, 1, 1), BBox(0, 0, 1, 1), w), fsd::Error);
}

TEST_CASE("property: area_diff_norm symmetry") {
    fsd::Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        BBox a = random_box(rng), b = random_box(rng);
        CHECK(fsd::area_diff_norm(a, b) == doctest::Approx(fsd::area_diff_norm(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("property: scale invariance of iou, area_diff_norm, burning_intensity") {
    fsd::Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        BBox a = random_box(rng), b = random_box(rng);
        double s = rng.uniform(0.05, 20.0);
        BBox as(a.cx * s, a.cy * s, a.w * s, a.h * s);
        BBox bs(b.cx * s, b.cy * s, b.w * s, b.h * s);
        CHECK(std::fabs(fsd::iou(a, b) - fsd::iou(as, bs)) < 1e-9);
        CHECK(std::fabs(fsd::area_diff_norm(a, b) - fsd::area_diff_norm(as, bs)) < 1e-9);
        CHECK(std::fabs(fsd::burning_intensity(a, b) - fsd::burning_intensity(as, bs)) < 1e-9);
    }
}

TEST_CASE("property: translation invariance of area_diff_norm") {
    fsd::Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        BBox a = random_box(rng), b = random_box(rng);
        double dx = rng.uniform(-50, 50), dy = rng.uniform(-50, 50);
        BBox bt(b.cx + dx, b.cy + dy, b.w, b.h);
        CHECK(fsd::area_diff_norm(a, b) == doctest::Approx(fsd::area_diff_norm(a, bt)).epsilon(1e-12));
    }
}

TEST_CASE("property: grid shift never raises iou above the aligned value") {
    // exhaustive shifts of one small integer box against another
    for (int w = 1; w <= 3; ++w)
        for (int h = 1; h <= 3; ++h) {
            BBox base(0, 0, 2 * w, 2 * h);
            double aligned = fsd::iou(base, base);
            for (int dx = -8; dx <= 8; ++dx)
                for (int dy = -8; dy <= 8; ++dy) {
                    BBox shifted(dx, dy, 2.0 * w, 2.0 * h);
                    CHECK(fsd::iou(base, shifted) <= aligned + 1e-12);
                }
        }
}

TEST_CASE("property: metric ranges hold under fuzz") {
    fsd::Rng rng(10);
    for (int i = 0; i < 3000; ++i) {
        BBox a = random_box(rng, 1000.0), b = random_box(rng, 1000.0);
        for (double v : {fsd::iou(a, b), fsd::area_diff_norm(a, b), fsd::burning_intensity(a, b)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("property: burning_intensity is 1 iff boxes identical (positive weights)") {
    fsd::Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        BBox a = random_box(rng);
        CHECK(std::fabs(fsd::burning_intensity(a, a) - 1.0) < 1e-9);
        // perturb one field by a definite amount: BI must drop strictly below 1
        double delta = rng.uniform(1e-3, 10.0) * (rng.bernoulli(0.5) ? 1 : -1);
        BBox b = a;
        switch (rng.uniform_int(0, 3)) {
            case 0: b.cx += delta; break;
            case 1: b.cy += delta; break;
            case 2: b.w += std::fabs(delta); break;
            default: b.h += std::fabs(delta); break;
        }
        CHECK(fsd::burning_intensity(a, b) < 1.0 - 1e-12);
    }
}
