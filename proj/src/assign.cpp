#include "assign.hpp"

#include <cmath>

namespace fsd {

double centerness_target(double l, double t, double r, double b) {
    double lr = std::min(l, r) / std::max(l, r);
    double tb = std::min(t, b) / std::max(t, b);
    return std::sqrt(lr * tb);
}

TargetMap assign_targets(const std::vector<LabeledBox>& gts, const Config& config) {
    for (const auto& g : gts) g.box.validate();
    TargetMap map;
    for (int level = 0; level < config.num_levels(); ++level) {
        int stride = config.strides[level];
        auto [range_lo, range_hi] = config.level_range(level);
        TargetLevel tl;
        tl.h = config.input_h / stride;
        tl.w = config.input_w / stride;
        tl.cls.assign(static_cast<size_t>(tl.h) * tl.w, -1);
        tl.reg = Tensor(4, tl.h, tl.w);
        tl.centerness.assign(static_cast<size_t>(tl.h) * tl.w, 0.0);

        for (int iy = 0; iy < tl.h; ++iy) {
            double py = (iy + 0.5) * stride;
            for (int ix = 0; ix < tl.w; ++ix) {
                double px = (ix + 0.5) * stride;
                double best_area = std::numeric_limits<double>::infinity();
                int best_gt = -1;
                double bl = 0, bt = 0, br = 0, bb = 0;
                for (size_t gi = 0; gi < gts.size(); ++gi) {
                    const BBox& box = gts[gi].box;
                    double l = px - box.x1();
                    double t = py - box.y1();
                    double r = box.x2() - px;
                    double b = box.y2() - py;
                    if (std::min(std::min(l, t), std::min(r, b)) <= 0) continue;
                    double m = std::max(std::max(l, t), std::max(r, b));
                    if (m <= range_lo || m > range_hi) continue;
                    double a = box.w * box.h;
                    if (a < best_area) {
                        best_area = a;
                        best_gt = static_cast<int>(gi);
                        bl = l; bt = t; br = r; bb = b;
                    }
                }
                if (best_gt < 0) continue;
                size_t loc = static_cast<size_t>(iy) * tl.w + ix;
                tl.cls[loc] = static_cast<int>(gts[static_cast<size_t>(best_gt)].category);
                tl.reg.at(0, iy, ix) = bl / stride;
                tl.reg.at(1, iy, ix) = bt / stride;
                tl.reg.at(2, iy, ix) = br / stride;
                tl.reg.at(3, iy, ix) = bb / stride;
                tl.centerness[loc] = centerness_target(bl, bt, br, bb);
                ++map.num_pos;
            }
        }
        map.levels.push_back(std::move(tl));
    }
    return map;
}

} // namespace fsd
