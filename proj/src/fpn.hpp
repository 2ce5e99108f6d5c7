#pragma once

#include <vector>

#include "nn.hpp"

namespace fsd {

// Top-down feature pyramid: 1x1 lateral projections to a common width,
// nearest-neighbor upsample-and-add, then a 3x3 smoothing conv per level.
// Inputs and outputs are ordered fine -> coarse; spatial sizes are preserved.
class FeaturePyramid {
public:
    FeaturePyramid() = default;
    FeaturePyramid(const std::vector<int>& in_widths, int out_width);

    void init(Rng& rng);
    void set_name(const std::string& prefix);
    void collect(std::vector<Param*>& out);

    std::vector<Tensor> forward(const std::vector<Tensor>& maps);
    std::vector<Tensor> backward(const std::vector<Tensor>& d_outs);

    uint64_t mult_adds(const std::vector<std::pair<int, int>>& level_sizes) const;
    int out_width() const { return out_width_; }

private:
    std::vector<int> in_widths_;
    int out_width_ = 0;
    std::vector<Conv2d> laterals_;
    std::vector<Conv2d> smooths_;
    std::vector<std::pair<int, int>> sizes_;  // per-level (h, w) of latest forward
};

} // namespace fsd
