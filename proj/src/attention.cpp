#include "attention.hpp"

#include <algorithm>
#include <cmath>

#include "nn.hpp"

namespace fsd {

void channel_descriptors(const Tensor& fmap, std::vector<double>& gap, std::vector<double>& mp) {
    gap.assign(fmap.c, 0.0);
    mp.assign(fmap.c, 0.0);
    const size_t plane = fmap.plane();
    for (int c = 0; c < fmap.c; ++c) {
        const double* p = fmap.channel(c);
        double sum = p[0];
        double mx = p[0];
        for (size_t i = 1; i < plane; ++i) {
            sum += p[i];
            if (p[i] > mx) mx = p[i];
        }
        gap[c] = sum / static_cast<double>(plane);
        mp[c] = mx;
    }
}

AttentionScores fuse_and_normalize(const std::vector<double>& gap, const std::vector<double>& mp) {
    if (gap.size() != mp.size() || gap.empty())
        raise(Errc::config, "descriptor length mismatch in attention fusion");
    std::vector<double> fused(gap.size());
    for (size_t c = 0; c < gap.size(); ++c) fused[c] = gap[c] + mp[c];

    double mx = *std::max_element(fused.begin(), fused.end());
    double denom = 0.0;
    AttentionScores out;
    out.scores.resize(fused.size());
    for (size_t c = 0; c < fused.size(); ++c) {
        // floor keeps far-from-max channels strictly positive instead of
        // letting exp underflow to zero
        out.scores[c] = std::max(std::exp(fused[c] - mx), 1e-300);
        denom += out.scores[c];
    }
    for (double& s : out.scores) s /= denom;
    return out;
}

Tensor apply_attention(const Tensor& fmap, const AttentionScores& scores, bool rescale_by_c) {
    if (static_cast<int>(scores.scores.size()) != fmap.c)
        raise(Errc::config, "attention score count does not match channels");
    double rescale = rescale_by_c ? static_cast<double>(fmap.c) : 1.0;
    Tensor out(fmap.c, fmap.h, fmap.w);
    const size_t plane = fmap.plane();
    for (int c = 0; c < fmap.c; ++c) {
        const double* src = fmap.channel(c);
        double* dst = out.channel(c);
        double k = scores.scores[c] * rescale;
        for (size_t i = 0; i < plane; ++i) dst[i] = src[i] * k;
    }
    return out;
}

Tensor shortcut_merge(const Tensor& original, const Tensor& attended) {
    check_same_shape(original, attended, "shortcut_merge");
    return add(original, attended);
}

Tensor ChannelAttention::forward(const Tensor& x) {
    x_ = x;
    if (!enabled_) {
        scores_ = AttentionScores{};
        return add(x, x);  // identity reweighting keeps the shortcut semantics
    }
    std::vector<double> gap, mp;
    channel_descriptors(x, gap, mp);
    // remember where each channel max lives for the max-pool backward
    argmax_.assign(x.c, 0);
    const size_t plane = x.plane();
    for (int c = 0; c < x.c; ++c) {
        const double* p = x.channel(c);
        size_t best = 0;
        for (size_t i = 1; i < plane; ++i)
            if (p[i] > p[best]) best = i;
        argmax_[c] = best;
    }
    scores_ = fuse_and_normalize(gap, mp);
    return shortcut_merge(x, apply_attention(x, scores_, rescale_));
}

Tensor ChannelAttention::backward(const Tensor& dy) const {
    check_same_shape(dy, x_, "attention backward");
    if (!enabled_) {
        Tensor dx = dy;
        for (double& v : dx.v) v *= 2.0;
        return dx;
    }
    const size_t plane = x_.plane();
    const double rescale = rescale_ ? static_cast<double>(x_.c) : 1.0;
    const auto& s = scores_.scores;

    // d(loss)/d(score_c) through the reweighted branch
    std::vector<double> dscore(x_.c, 0.0);
    for (int c = 0; c < x_.c; ++c) {
        const double* d = dy.channel(c);
        const double* xv = x_.channel(c);
        double q = 0.0;
        for (size_t i = 0; i < plane; ++i) q += d[i] * xv[i];
        dscore[c] = q * rescale;
    }
    // softmax jacobian
    double dot = 0.0;
    for (int c = 0; c < x_.c; ++c) dot += dscore[c] * s[c];
    std::vector<double> dfused(x_.c);
    for (int c = 0; c < x_.c; ++c) dfused[c] = s[c] * (dscore[c] - dot);

    Tensor dx(x_.c, x_.h, x_.w);
    for (int c = 0; c < x_.c; ++c) {
        const double* d = dy.channel(c);
        double* dst = dx.channel(c);
        double direct = 1.0 + s[c] * rescale;
        double gap_term = dfused[c] / static_cast<double>(plane);
        for (size_t i = 0; i < plane; ++i) dst[i] = d[i] * direct + gap_term;
        dst[argmax_[c]] += dfused[c];
    }
    return dx;
}

} // namespace fsd
