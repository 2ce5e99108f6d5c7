#pragma once

#include <vector>

#include "attention.hpp"
#include "nn.hpp"

namespace fsd {

struct HeadConfig {
    int channels = 64;
    int num_classes = 2;
    int tower_depth = 4;
    bool attention_enabled = true;
    bool rescale_by_c = true;

    void validate() const {
        if (channels < 1 || num_classes < 1 || tower_depth < 1)
            raise(Errc::config, "head config fields must be positive");
    }
};

// Per-location classification logits, regression distances (l, t, r, b in
// stride units, non-negative), and centerness logits.
struct HeadOutput {
    Tensor cls_logits;  // (num_classes, H, W)
    Tensor reg;         // (4, H, W), post-activation
    Tensor centerness;  // (1, H, W)
};

// Detection head: a shared convolutional tower, a channel-attention unit with
// a shortcut, and three projection convolutions. The tower and projections are
// shared across pyramid levels; only the regression scale is per level.
//
// Layers cache the activations of the latest forward, so backward() must be
// paired with the forward() that produced its outputs before the head is run
// on another level or image.
class Head {
public:
    Head() = default;
    Head(const HeadConfig& config, int num_levels);

    void init(Rng& rng);
    void set_name(const std::string& prefix);
    void collect(std::vector<Param*>& out);

    HeadOutput forward(const Tensor& fmap, int level);
    // Gradients w.r.t. that forward's outputs; returns the gradient w.r.t. the
    // input feature map and accumulates parameter gradients.
    Tensor backward(const Tensor& d_cls, const Tensor& d_reg, const Tensor& d_ctr);

    // Gradient of a classification-logit functional w.r.t. the post-attention
    // feature map of the latest forward. Accumulates into the projection's
    // parameter gradients; callers that only want the map should zero grads.
    Tensor backward_cls_to_merged(const Tensor& d_cls);
    const Tensor& post_attention_map() const { return merged_; }

    const HeadConfig& config() const { return config_; }
    int num_levels() const { return static_cast<int>(reg_scales_.size()); }
    uint64_t mult_adds(int in_h, int in_w) const;

private:
    HeadConfig config_;
    std::vector<Conv2d> tower_convs_;
    std::vector<GroupNorm> tower_norms_;
    std::vector<ReLU> tower_relus_;
    ChannelAttention attention_;
    Conv2d cls_proj_, reg_proj_, ctr_proj_;
    std::vector<Param> reg_scales_;

    int last_level_ = -1;
    Tensor merged_;    // post-attention feature
    Tensor reg_pre_;   // regression logits before the exp map
    Tensor reg_post_;
};

} // namespace fsd
