#pragma once

#include <vector>

#include "config.hpp"
#include "eval.hpp"
#include "tensor.hpp"

namespace fsd {

// Dense training targets for one pyramid level. Regression distances are in
// stride units to match the head's output convention.
struct TargetLevel {
    int h = 0, w = 0;
    std::vector<int> cls;          // class index per location, -1 for background
    Tensor reg;                    // (4, H, W): l, t, r, b, meaningful at positives
    std::vector<double> centerness;  // per location, meaningful at positives

    bool positive(int y, int x) const { return cls[static_cast<size_t>(y) * w + x] >= 0; }
};

struct TargetMap {
    std::vector<TargetLevel> levels;
    int num_pos = 0;
};

// Location (i, j) of a level maps to image pixel ((j + 0.5) * stride,
// (i + 0.5) * stride). A location is positive for a box when it falls strictly
// inside it and the largest regression distance lands in the level's range;
// among candidates the smallest-area box wins, ties to the earlier box.
TargetMap assign_targets(const std::vector<LabeledBox>& gts, const Config& config);

// centerness = sqrt((min(l,r)/max(l,r)) * (min(t,b)/max(t,b)))
double centerness_target(double l, double t, double r, double b);

} // namespace fsd
