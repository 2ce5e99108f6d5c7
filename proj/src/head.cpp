#include "head.hpp"

#include <cmath>

namespace fsd {

namespace {
// Keeps the exponential regression map finite; inactive for sane logits.
constexpr double kExpLo = -30.0;
constexpr double kExpHi = 20.0;
} // namespace

Head::Head(const HeadConfig& config, int num_levels) : config_(config) {
    config_.validate();
    if (num_levels < 1) raise(Errc::config, "head needs at least one pyramid level");
    const int w = config_.channels;
    for (int i = 0; i < config_.tower_depth; ++i) {
        tower_convs_.emplace_back(w, w, 3, 1, 1);
        tower_norms_.emplace_back(w, GroupNorm::default_groups(w));
        tower_relus_.emplace_back();
    }
    attention_ = ChannelAttention(config_.attention_enabled, config_.rescale_by_c);
    cls_proj_ = Conv2d(w, config_.num_classes, 3, 1, 1);
    reg_proj_ = Conv2d(w, 4, 3, 1, 1);
    ctr_proj_ = Conv2d(w, 1, 3, 1, 1);
    reg_scales_.resize(num_levels);
    for (auto& s : reg_scales_) {
        s.resize({1});
        s.w[0] = 1.0;
    }
}

void Head::init(Rng& rng) {
    for (auto& c : tower_convs_) c.init(rng);
    for (auto& n : tower_norms_) n.init();
    cls_proj_.init(rng);
    reg_proj_.init(rng);
    ctr_proj_.init(rng);
    // rare-positive prior on the classification bias
    const double pi = 0.01;
    double b = -std::log((1.0 - pi) / pi);
    std::fill(cls_proj_.bias.w.begin(), cls_proj_.bias.w.end(), b);
    for (auto& s : reg_scales_) s.w[0] = 1.0;
}

void Head::set_name(const std::string& prefix) {
    for (size_t i = 0; i < tower_convs_.size(); ++i) {
        tower_convs_[i].set_name(prefix + ".tower" + std::to_string(i) + ".conv");
        tower_norms_[i].set_name(prefix + ".tower" + std::to_string(i) + ".gn");
    }
    cls_proj_.set_name(prefix + ".cls");
    reg_proj_.set_name(prefix + ".reg");
    ctr_proj_.set_name(prefix + ".ctr");
    for (size_t l = 0; l < reg_scales_.size(); ++l)
        reg_scales_[l].name = prefix + ".scale" + std::to_string(l);
}

void Head::collect(std::vector<Param*>& out) {
    for (size_t i = 0; i < tower_convs_.size(); ++i) {
        tower_convs_[i].collect(out);
        tower_norms_[i].collect(out);
    }
    cls_proj_.collect(out);
    reg_proj_.collect(out);
    ctr_proj_.collect(out);
    for (auto& s : reg_scales_) out.push_back(&s);
}

HeadOutput Head::forward(const Tensor& fmap, int level) {
    if (level < 0 || level >= num_levels()) raise(Errc::config, "head: level out of range");
    if (fmap.c != config_.channels)
        raise(Errc::config, "head: input feature has wrong channel count");
    last_level_ = level;

    Tensor x = fmap;
    for (size_t i = 0; i < tower_convs_.size(); ++i) {
        x = tower_convs_[i].forward(x);
        x = tower_norms_[i].forward(x);
        x = tower_relus_[i].forward(x);
    }
    merged_ = attention_.forward(x);

    HeadOutput out;
    out.cls_logits = cls_proj_.forward(merged_);
    reg_pre_ = reg_proj_.forward(merged_);
    out.centerness = ctr_proj_.forward(merged_);

    const double scale = reg_scales_[level].w[0];
    reg_post_ = Tensor(4, reg_pre_.h, reg_pre_.w);
    for (size_t i = 0; i < reg_pre_.size(); ++i)
        reg_post_.v[i] = std::exp(std::clamp(scale * reg_pre_.v[i], kExpLo, kExpHi));
    out.reg = reg_post_;
    return out;
}

Tensor Head::backward(const Tensor& d_cls, const Tensor& d_reg, const Tensor& d_ctr) {
    if (last_level_ < 0) raise(Errc::config, "head backward without a forward");
    const double scale = reg_scales_[last_level_].w[0];

    Tensor d_reg_pre(4, reg_pre_.h, reg_pre_.w);
    double d_scale = 0.0;
    for (size_t i = 0; i < reg_pre_.size(); ++i) {
        double arg = scale * reg_pre_.v[i];
        double grad = (arg > kExpLo && arg < kExpHi) ? d_reg.v[i] * reg_post_.v[i] : 0.0;
        d_reg_pre.v[i] = grad * scale;
        d_scale += grad * reg_pre_.v[i];
    }
    reg_scales_[last_level_].g[0] += d_scale;

    Tensor d_merged = cls_proj_.backward(d_cls);
    d_merged = add(d_merged, reg_proj_.backward(d_reg_pre));
    d_merged = add(d_merged, ctr_proj_.backward(d_ctr));

    Tensor dx = attention_.backward(d_merged);
    for (size_t i = tower_convs_.size(); i-- > 0;) {
        dx = tower_relus_[i].backward(dx);
        dx = tower_norms_[i].backward(dx);
        dx = tower_convs_[i].backward(dx);
    }
    return dx;
}

Tensor Head::backward_cls_to_merged(const Tensor& d_cls) {
    if (last_level_ < 0) raise(Errc::config, "head backward without a forward");
    return cls_proj_.backward(d_cls);
}

uint64_t Head::mult_adds(int in_h, int in_w) const {
    uint64_t total = 0;
    for (const auto& c : tower_convs_) total += c.mult_adds(in_h, in_w);
    total += cls_proj_.mult_adds(in_h, in_w);
    total += reg_proj_.mult_adds(in_h, in_w);
    total += ctr_proj_.mult_adds(in_h, in_w);
    // attention reweighting and shortcut: one multiply-add per cell
    total += static_cast<uint64_t>(config_.channels) * in_h * in_w;
    return total;
}

} // namespace fsd
