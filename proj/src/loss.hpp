#pragma once

#include "assign.hpp"
#include "head.hpp"

namespace fsd {

struct LossBundle {
    double cls_loss = 0.0;
    double reg_loss = 0.0;
    double centerness_loss = 0.0;
    double total = 0.0;

    LossBundle& operator+=(const LossBundle& o) {
        cls_loss += o.cls_loss;
        reg_loss += o.reg_loss;
        centerness_loss += o.centerness_loss;
        total += o.total;
        return *this;
    }
};

// Per-level loss terms and output gradients. Focal loss over every location
// and class, IoU loss and centerness BCE at positives; each term is divided by
// max(1, num_pos) where num_pos counts positives across all levels.
struct LevelLossResult {
    LossBundle loss;
    Tensor d_cls;
    Tensor d_reg;
    Tensor d_ctr;
};

struct FocalParams {
    double alpha = 0.25;
    double gamma = 2.0;
};

LevelLossResult level_loss(const HeadOutput& out, const TargetLevel& targets, int num_pos_total,
                           const FocalParams& focal = FocalParams());

// Sums level losses for reporting; total = cls + reg + centerness.
LossBundle finalize_loss(const std::vector<LevelLossResult>& levels);

} // namespace fsd
