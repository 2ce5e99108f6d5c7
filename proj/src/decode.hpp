#pragma once

#include <vector>

#include "config.hpp"
#include "eval.hpp"
#include "head.hpp"

namespace fsd {

// Turn head outputs into scored boxes: per-location score is
// sigmoid(cls) * sigmoid(centerness); locations at or above score_threshold
// become center-format boxes clipped to the image.
std::vector<LabeledBox> decode(const std::vector<HeadOutput>& outputs, const Config& config,
                               const std::string& image_id);

// Greedy per-class suppression by descending confidence; a kept box suppresses
// same-class boxes with IoU strictly above the threshold. Ties in confidence
// keep insertion order. All detections must share one image_id.
std::vector<LabeledBox> nms(const std::vector<LabeledBox>& dets, double iou_threshold);

// decode + nms + confidence cap, the standard inference tail
std::vector<LabeledBox> postprocess(const std::vector<HeadOutput>& outputs, const Config& config,
                                    const std::string& image_id);

} // namespace fsd
