#include "decode.hpp"

#include <algorithm>
#include <numeric>

namespace fsd {

std::vector<LabeledBox> decode(const std::vector<HeadOutput>& outputs, const Config& config,
                               const std::string& image_id) {
    if (static_cast<int>(outputs.size()) != config.num_levels())
        raise(Errc::config, "decode: level count mismatch");
    std::vector<LabeledBox> dets;
    const double img_w = config.input_w;
    const double img_h = config.input_h;

    for (int level = 0; level < config.num_levels(); ++level) {
        const HeadOutput& out = outputs[level];
        const double stride = config.strides[level];
        for (int iy = 0; iy < out.cls_logits.h; ++iy) {
            double py = (iy + 0.5) * stride;
            for (int ix = 0; ix < out.cls_logits.w; ++ix) {
                double px = (ix + 0.5) * stride;
                double ctr = sigmoid(out.centerness.at(0, iy, ix));
                for (int k = 0; k < out.cls_logits.c; ++k) {
                    double score = sigmoid(out.cls_logits.at(k, iy, ix)) * ctr;
                    if (score < config.score_threshold) continue;
                    double x1 = px - out.reg.at(0, iy, ix) * stride;
                    double y1 = py - out.reg.at(1, iy, ix) * stride;
                    double x2 = px + out.reg.at(2, iy, ix) * stride;
                    double y2 = py + out.reg.at(3, iy, ix) * stride;
                    x1 = std::clamp(x1, 0.0, img_w);
                    y1 = std::clamp(y1, 0.0, img_h);
                    x2 = std::clamp(x2, 0.0, img_w);
                    y2 = std::clamp(y2, 0.0, img_h);
                    if (x2 - x1 <= 0 || y2 - y1 <= 0) continue;
                    LabeledBox det;
                    det.box = BBox::from_corners(x1, y1, x2, y2);
                    det.category = static_cast<Category>(k);
                    det.confidence = score;
                    det.image_id = image_id;
                    dets.push_back(std::move(det));
                }
            }
        }
    }
    return dets;
}

std::vector<LabeledBox> nms(const std::vector<LabeledBox>& dets, double iou_threshold) {
    for (const auto& d : dets)
        if (d.image_id != dets.front().image_id)
            raise(Errc::protocol, "nms requires a single image_id");

    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return dets[a].confidence.value_or(0.0) > dets[b].confidence.value_or(0.0);
    });

    std::vector<bool> suppressed(dets.size(), false);
    std::vector<LabeledBox> kept;
    for (size_t oi = 0; oi < order.size(); ++oi) {
        size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(dets[i]);
        for (size_t oj = oi + 1; oj < order.size(); ++oj) {
            size_t j = order[oj];
            if (suppressed[j] || dets[j].category != dets[i].category) continue;
            if (iou(dets[i].box, dets[j].box) > iou_threshold) suppressed[j] = true;
        }
    }
    return kept;
}

std::vector<LabeledBox> postprocess(const std::vector<HeadOutput>& outputs, const Config& config,
                                    const std::string& image_id) {
    auto dets = decode(outputs, config, image_id);
    if (dets.empty()) return dets;
    dets = nms(dets, config.nms_iou);
    if (static_cast<int>(dets.size()) > config.max_detections) {
        std::stable_sort(dets.begin(), dets.end(), [](const LabeledBox& a, const LabeledBox& b) {
            return a.confidence.value_or(0.0) > b.confidence.value_or(0.0);
        });
        dets.resize(static_cast<size_t>(config.max_detections));
    }
    return dets;
}

} // namespace fsd
