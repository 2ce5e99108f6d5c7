#pragma once

#include <cmath>
#include <string>

#include "error.hpp"

namespace fsd {

// Axis-aligned box in center format. Width and height must be positive and
// finite; degenerate boxes are rejected at construction, never clamped.
struct BBox {
    double cx = 0, cy = 0, w = 0, h = 0;

    BBox() = default;
    BBox(double cx_, double cy_, double w_, double h_) : cx(cx_), cy(cy_), w(w_), h(h_) {
        validate();
    }

    void validate() const {
        if (!(std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h)))
            raise(Errc::invalid_argument, "box has non-finite fields");
        if (!(w > 0 && h > 0)) raise(Errc::invalid_argument, "box has non-positive width or height");
    }

    double x1() const { return cx - w / 2; }
    double y1() const { return cy - h / 2; }
    double x2() const { return cx + w / 2; }
    double y2() const { return cy + h / 2; }

    static BBox from_corners(double x1, double y1, double x2, double y2) {
        return BBox((x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1);
    }
};

// Convex weights for the burning-intensity combination. Must be non-negative
// and sum to 1 within 1e-12.
struct BIWeights {
    double w1 = 0.5;  // weight on the area-difference term
    double w2 = 0.5;  // weight on the IoU term

    BIWeights() = default;
    BIWeights(double a, double b) : w1(a), w2(b) { validate(); }

    void validate() const {
        if (!(std::isfinite(w1) && std::isfinite(w2)) || w1 < 0 || w2 < 0 ||
            std::fabs(w1 + w2 - 1.0) > 1e-12)
            raise(Errc::invalid_argument, "burning-intensity weights must be >= 0 and sum to 1");
    }
};

// w * h, strictly positive for a valid box.
double area(const BBox& box);

// Intersection over union via corner-form clipping; 0 when disjoint.
double iou(const BBox& a, const BBox& b);

// 1 - |A_a - A_b| / max(A_a, A_b). 1 when areas are equal, tends to 0 as the
// area ratio diverges. Position-independent.
double area_diff_norm(const BBox& a, const BBox& b);

// burning intensity: w1 * area_diff_norm + w2 * iou. Equals 1 iff the boxes
// are identical (when both weights are positive).
double burning_intensity(const BBox& pred, const BBox& gt, const BIWeights& weights = BIWeights());

} // namespace fsd
