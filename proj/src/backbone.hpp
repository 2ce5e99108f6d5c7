#pragma once

#include <vector>

#include "nn.hpp"

namespace fsd {

// Small residual backbone: a stride-2 stem plus four stride-2 stages, so the
// stage outputs sit at strides 4, 8, 16 and 32. The last three feed the neck.
class Backbone {
public:
    Backbone() = default;
    explicit Backbone(const std::vector<int>& stage_widths, int in_channels = 3);

    void init(Rng& rng);
    void set_name(const std::string& prefix);
    void collect(std::vector<Param*>& out);

    // fine -> coarse feature maps at strides {8, 16, 32}
    std::vector<Tensor> forward(const Tensor& image);
    Tensor backward(const std::vector<Tensor>& d_outs);

    uint64_t mult_adds(int in_h, int in_w) const;
    const std::vector<int>& stage_widths() const { return widths_; }

private:
    struct Stage {
        Conv2d down;
        GroupNorm down_gn;
        ReLU down_relu;
        Conv2d conv1;
        GroupNorm gn1;
        ReLU relu1;
        Conv2d conv2;
        GroupNorm gn2;
        ReLU out_relu;
        Tensor forward(const Tensor& x);
        Tensor backward(const Tensor& dy);
    };

    std::vector<int> widths_;
    Conv2d stem_;
    GroupNorm stem_gn_;
    ReLU stem_relu_;
    std::vector<Stage> stages_;
};

} // namespace fsd
