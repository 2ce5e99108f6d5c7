#include "loss.hpp"

#include <cmath>

namespace fsd {

namespace {

constexpr double kProbFloor = 1e-12;

double clamped_log(double p) { return std::log(std::max(p, kProbFloor)); }

// focal term and d/dz for one location-class pair
void focal_term(double z, bool positive, const FocalParams& fp, double& loss, double& grad) {
    double p = sigmoid(z);
    if (positive) {
        double om = 1.0 - p;
        double pow_g = std::pow(om, fp.gamma);
        loss = -fp.alpha * pow_g * clamped_log(p);
        grad = fp.alpha * pow_g * (fp.gamma * p * clamped_log(p) - om);
    } else {
        double pow_g = std::pow(p, fp.gamma);
        loss = -(1.0 - fp.alpha) * pow_g * clamped_log(1.0 - p);
        grad = (1.0 - fp.alpha) * pow_g * (p - fp.gamma * (1.0 - p) * clamped_log(1.0 - p));
    }
}

} // namespace

LevelLossResult level_loss(const HeadOutput& out, const TargetLevel& targets, int num_pos_total,
                           const FocalParams& fp) {
    const int h = targets.h, w = targets.w;
    if (out.cls_logits.h != h || out.cls_logits.w != w)
        raise(Errc::config, "loss: output/target shape mismatch");
    for (const Tensor* t : {&out.cls_logits, &out.reg, &out.centerness})
        for (double v : t->v)
            if (!std::isfinite(v)) raise(Errc::numeric, "non-finite value in head output");

    const double norm = 1.0 / std::max(1, num_pos_total);
    LevelLossResult res;
    res.d_cls = Tensor(out.cls_logits.c, h, w);
    res.d_reg = Tensor(4, h, w);
    res.d_ctr = Tensor(1, h, w);

    // classification: focal loss over every location and class
    for (int k = 0; k < out.cls_logits.c; ++k) {
        for (int iy = 0; iy < h; ++iy)
            for (int ix = 0; ix < w; ++ix) {
                bool positive = targets.cls[static_cast<size_t>(iy) * w + ix] == k;
                double loss, grad;
                focal_term(out.cls_logits.at(k, iy, ix), positive, fp, loss, grad);
                res.loss.cls_loss += loss * norm;
                res.d_cls.at(k, iy, ix) = grad * norm;
            }
    }

    // regression and centerness at positive locations only
    for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix) {
            if (!targets.positive(iy, ix)) continue;
            size_t loc = static_cast<size_t>(iy) * w + ix;

            double pl = out.reg.at(0, iy, ix), pt = out.reg.at(1, iy, ix);
            double pr = out.reg.at(2, iy, ix), pb = out.reg.at(3, iy, ix);
            double gl = targets.reg.at(0, iy, ix), gt_ = targets.reg.at(1, iy, ix);
            double gr = targets.reg.at(2, iy, ix), gb = targets.reg.at(3, iy, ix);

            double iw = std::min(pl, gl) + std::min(pr, gr);
            double ih = std::min(pt, gt_) + std::min(pb, gb);
            double inter = iw * ih;
            double area_p = (pl + pr) * (pt + pb);
            double area_g = (gl + gr) * (gt_ + gb);
            double uni = area_p + area_g - inter;
            double iou_v = inter / uni;
            // 1 - iou keeps the gradient bounded even when a predicted box
            // collapses; -log(iou) blows up as 1/iou and derails SGD
            res.loss.reg_loss += (1.0 - iou_v) * norm;
            double d_iou = -norm;
            auto push = [&](int channel, double d_inter_dx, double d_area_dx) {
                double d_union_dx = d_area_dx - d_inter_dx;
                double d = d_iou * (d_inter_dx * uni - inter * d_union_dx) / (uni * uni);
                res.d_reg.at(channel, iy, ix) = d;
            };
            push(0, pl < gl ? ih : 0.0, pt + pb);
            push(1, pt < gt_ ? iw : 0.0, pl + pr);
            push(2, pr < gr ? ih : 0.0, pt + pb);
            push(3, pb < gb ? iw : 0.0, pl + pr);

            double z = out.centerness.at(0, iy, ix);
            double t = targets.centerness[loc];
            res.loss.centerness_loss +=
                (std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::fabs(z)))) * norm;
            res.d_ctr.at(0, iy, ix) = (sigmoid(z) - t) * norm;
        }

    res.loss.total = res.loss.cls_loss + res.loss.reg_loss + res.loss.centerness_loss;
    return res;
}

LossBundle finalize_loss(const std::vector<LevelLossResult>& levels) {
    LossBundle sum;
    for (const auto& lv : levels) sum += lv.loss;
    return sum;
}

} // namespace fsd
