#include "backbone.hpp"

namespace fsd {

Backbone::Backbone(const std::vector<int>& stage_widths, int in_channels) : widths_(stage_widths) {
    if (widths_.size() != 4) raise(Errc::config, "backbone expects exactly 4 stage widths");
    stem_ = Conv2d(in_channels, widths_[0], 3, 2, 1);
    stem_gn_ = GroupNorm(widths_[0], GroupNorm::default_groups(widths_[0]));
    int prev = widths_[0];
    for (int i = 0; i < 4; ++i) {
        int w = widths_[i];
        Stage s;
        s.down = Conv2d(prev, w, 3, 2, 1);
        s.down_gn = GroupNorm(w, GroupNorm::default_groups(w));
        s.conv1 = Conv2d(w, w, 3, 1, 1);
        s.gn1 = GroupNorm(w, GroupNorm::default_groups(w));
        s.conv2 = Conv2d(w, w, 3, 1, 1);
        s.gn2 = GroupNorm(w, GroupNorm::default_groups(w));
        stages_.push_back(std::move(s));
        prev = w;
    }
}

void Backbone::init(Rng& rng) {
    stem_.init(rng);
    stem_gn_.init();
    for (auto& s : stages_) {
        s.down.init(rng);
        s.down_gn.init();
        s.conv1.init(rng);
        s.gn1.init();
        s.conv2.init(rng);
        s.gn2.init();
    }
}

void Backbone::set_name(const std::string& prefix) {
    stem_.set_name(prefix + ".stem.conv");
    stem_gn_.set_name(prefix + ".stem.gn");
    for (size_t i = 0; i < stages_.size(); ++i) {
        std::string sp = prefix + ".stage" + std::to_string(i);
        stages_[i].down.set_name(sp + ".down.conv");
        stages_[i].down_gn.set_name(sp + ".down.gn");
        stages_[i].conv1.set_name(sp + ".conv1");
        stages_[i].gn1.set_name(sp + ".gn1");
        stages_[i].conv2.set_name(sp + ".conv2");
        stages_[i].gn2.set_name(sp + ".gn2");
    }
}

void Backbone::collect(std::vector<Param*>& out) {
    stem_.collect(out);
    stem_gn_.collect(out);
    for (auto& s : stages_) {
        s.down.collect(out);
        s.down_gn.collect(out);
        s.conv1.collect(out);
        s.gn1.collect(out);
        s.conv2.collect(out);
        s.gn2.collect(out);
    }
}

Tensor Backbone::Stage::forward(const Tensor& x) {
    Tensor d = down_relu.forward(down_gn.forward(down.forward(x)));
    Tensor r = gn2.forward(conv2.forward(relu1.forward(gn1.forward(conv1.forward(d)))));
    return out_relu.forward(add(d, r));
}

Tensor Backbone::Stage::backward(const Tensor& dy) {
    Tensor dsum = out_relu.backward(dy);
    Tensor dr = gn2.backward(dsum);
    dr = conv2.backward(dr);
    dr = relu1.backward(dr);
    dr = gn1.backward(dr);
    dr = conv1.backward(dr);
    Tensor dd = add(dsum, dr);  // skip path plus residual path
    dd = down_relu.backward(dd);
    dd = down_gn.backward(dd);
    return down.backward(dd);
}

std::vector<Tensor> Backbone::forward(const Tensor& image) {
    if ((image.h % 32) != 0 || (image.w % 32) != 0)
        raise(Errc::config, "backbone input must be divisible by the largest stride (32)");
    Tensor x = stem_relu_.forward(stem_gn_.forward(stem_.forward(image)));
    std::vector<Tensor> outs;
    for (size_t i = 0; i < stages_.size(); ++i) {
        x = stages_[i].forward(x);
        if (i >= 1) outs.push_back(x);  // stages at strides 8, 16, 32
    }
    return outs;
}

Tensor Backbone::backward(const std::vector<Tensor>& d_outs) {
    if (d_outs.size() != 3) raise(Errc::config, "backbone backward expects 3 gradients");
    Tensor dx = stages_[3].backward(d_outs[2]);
    dx = add(dx, d_outs[1]);
    dx = stages_[2].backward(dx);
    dx = add(dx, d_outs[0]);
    dx = stages_[1].backward(dx);
    dx = stages_[0].backward(dx);
    dx = stem_relu_.backward(dx);
    dx = stem_gn_.backward(dx);
    return stem_.backward(dx);
}

uint64_t Backbone::mult_adds(int in_h, int in_w) const {
    uint64_t total = stem_.mult_adds(in_h, in_w);
    int h = (in_h + 1) / 2, w = (in_w + 1) / 2;
    for (const auto& s : stages_) {
        total += s.down.mult_adds(h, w);
        h = (h + 1) / 2;
        w = (w + 1) / 2;
        total += s.conv1.mult_adds(h, w);
        total += s.conv2.mult_adds(h, w);
    }
    return total;
}

} // namespace fsd
