#include "fpn.hpp"

namespace fsd {

FeaturePyramid::FeaturePyramid(const std::vector<int>& in_widths, int out_width)
    : in_widths_(in_widths), out_width_(out_width) {
    if (in_widths_.empty()) raise(Errc::config, "feature pyramid needs at least one level");
    for (int w : in_widths_) {
        laterals_.emplace_back(w, out_width_, 1, 1, 0);
        smooths_.emplace_back(out_width_, out_width_, 3, 1, 1);
    }
}

void FeaturePyramid::init(Rng& rng) {
    for (auto& c : laterals_) c.init(rng);
    for (auto& c : smooths_) c.init(rng);
}

void FeaturePyramid::set_name(const std::string& prefix) {
    for (size_t i = 0; i < laterals_.size(); ++i) {
        laterals_[i].set_name(prefix + ".lateral" + std::to_string(i));
        smooths_[i].set_name(prefix + ".smooth" + std::to_string(i));
    }
}

void FeaturePyramid::collect(std::vector<Param*>& out) {
    for (auto& c : laterals_) c.collect(out);
    for (auto& c : smooths_) c.collect(out);
}

std::vector<Tensor> FeaturePyramid::forward(const std::vector<Tensor>& maps) {
    if (maps.size() != laterals_.size())
        raise(Errc::config, "feature pyramid level count mismatch");
    const size_t n = maps.size();
    sizes_.clear();
    for (const auto& m : maps) sizes_.push_back({m.h, m.w});

    std::vector<Tensor> tops(n);
    for (size_t i = n; i-- > 0;) {
        tops[i] = laterals_[i].forward(maps[i]);
        if (i + 1 < n) {
            Tensor up = upsample2x_nearest(tops[i + 1]);
            if (up.h != tops[i].h || up.w != tops[i].w)
                raise(Errc::config, "feature pyramid levels are not dyadic");
            tops[i] = add(tops[i], up);
        }
    }
    std::vector<Tensor> outs(n);
    for (size_t i = 0; i < n; ++i) outs[i] = smooths_[i].forward(tops[i]);
    return outs;
}

std::vector<Tensor> FeaturePyramid::backward(const std::vector<Tensor>& d_outs) {
    const size_t n = laterals_.size();
    if (d_outs.size() != n) raise(Errc::config, "feature pyramid backward level mismatch");
    std::vector<Tensor> d_tops(n);
    for (size_t i = 0; i < n; ++i) d_tops[i] = smooths_[i].backward(d_outs[i]);

    std::vector<Tensor> d_maps(n);
    for (size_t i = 0; i < n; ++i) {
        if (i > 0) {
            // fan the fine level's gradient back into the coarser top
            Tensor dup = upsample2x_nearest_backward(d_tops[i - 1], d_tops[i].h, d_tops[i].w);
            d_tops[i] = add(d_tops[i], dup);
        }
        d_maps[i] = laterals_[i].backward(d_tops[i]);
    }
    return d_maps;
}

uint64_t FeaturePyramid::mult_adds(const std::vector<std::pair<int, int>>& level_sizes) const {
    uint64_t total = 0;
    for (size_t i = 0; i < laterals_.size(); ++i) {
        total += laterals_[i].mult_adds(level_sizes[i].first, level_sizes[i].second);
        total += smooths_[i].mult_adds(level_sizes[i].first, level_sizes[i].second);
    }
    return total;
}

} // namespace fsd
