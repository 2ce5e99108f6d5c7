#include "geometry.hpp"

#include <algorithm>

namespace fsd {

double area(const BBox& box) {
    box.validate();
    return box.w * box.h;
}

double iou(const BBox& a, const BBox& b) {
    a.validate();
    b.validate();
    double ix1 = std::max(a.x1(), b.x1());
    double iy1 = std::max(a.y1(), b.y1());
    double ix2 = std::min(a.x2(), b.x2());
    double iy2 = std::min(a.y2(), b.y2());
    double iw = std::max(0.0, ix2 - ix1);
    double ih = std::max(0.0, iy2 - iy1);
    double inter = iw * ih;
    if (inter <= 0) return 0.0;
    double uni = a.w * a.h + b.w * b.h - inter;
    return std::min(1.0, inter / uni);
}

double area_diff_norm(const BBox& a, const BBox& b) {
    double aa = area(a);
    double ab = area(b);
    return 1.0 - std::fabs(aa - ab) / std::max(aa, ab);
}

double burning_intensity(const BBox& pred, const BBox& gt, const BIWeights& weights) {
    weights.validate();
    return weights.w1 * area_diff_norm(pred, gt) + weights.w2 * iou(pred, gt);
}

} // namespace fsd
