#pragma once

#include <cmath>
#include <vector>

#include "tensor.hpp"

namespace fsd {

// Per-channel normalized attention scores: positive, summing to 1.
struct AttentionScores {
    std::vector<double> scores;

    void validate() const {
        double sum = 0.0;
        for (double s : scores) {
            if (!(s > 0.0)) raise(Errc::numeric, "attention score not positive");
            sum += s;
        }
        if (std::fabs(sum - 1.0) > 1e-6) raise(Errc::numeric, "attention scores do not sum to 1");
    }
};

// Spatial channel descriptors: gap[c] is the mean of channel c over H*W,
// mp[c] the max. mp >= gap elementwise.
void channel_descriptors(const Tensor& fmap, std::vector<double>& gap, std::vector<double>& mp);

// Elementwise fusion of the two pooled vectors followed by a max-stabilized
// softmax across channels.
AttentionScores fuse_and_normalize(const std::vector<double>& gap, const std::vector<double>& mp);

// out[c] = fmap[c] * scores[c] * (C if rescale_by_c else 1). With rescaling on,
// uniform scores reproduce the input exactly.
Tensor apply_attention(const Tensor& fmap, const AttentionScores& scores, bool rescale_by_c);

// Elementwise sum of the pre-attention map and the attention output.
Tensor shortcut_merge(const Tensor& original, const Tensor& attended);

// The full channel-attention unit used by the detection head:
//
//   out = x + reweight(x),  reweight(x)[c] = x[c] * softmax(gap(x) + mp(x))[c] * C
//
// Disabling the unit swaps the reweighting for the identity, so the merge
// becomes x + x; with rescale_by_c on and uniform channel statistics the two
// modes coincide, which is the head's ablation baseline contract.
class ChannelAttention {
public:
    ChannelAttention() = default;
    ChannelAttention(bool enabled, bool rescale_by_c) : enabled_(enabled), rescale_(rescale_by_c) {}

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

    const AttentionScores& last_scores() const { return scores_; }

private:
    bool enabled_ = true;
    bool rescale_ = true;
    Tensor x_;
    AttentionScores scores_;
    std::vector<size_t> argmax_;  // flat index of each channel max, for MP routing
};

} // namespace fsd
