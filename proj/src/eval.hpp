#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace fsd {

enum class Category : int { fire = 0, smoke = 1 };
constexpr int kNumCategories = 2;

const char* category_name(Category c);
// Throws Errc::schema for anything outside {fire, smoke}.
Category category_from_name(const std::string& name);

// A detection (with confidence) or a ground-truth annotation (without).
struct LabeledBox {
    BBox box;
    Category category = Category::fire;
    std::optional<double> confidence;  // absent for ground truth
    std::string image_id;

    void validate() const {
        box.validate();
        if (confidence && !(*confidence >= 0.0 && *confidence <= 1.0))
            raise(Errc::invalid_argument, "confidence outside [0,1]");
    }
};

struct MatchPair {
    size_t det_index;
    size_t gt_index;
    double iou;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<size_t> unmatched_detections;
    std::vector<size_t> unmatched_gts;
};

// Greedy per-class matching in descending confidence: each detection takes the
// highest-IoU unmatched ground truth of its class with IoU >= threshold; ties
// break toward the lower ground-truth index. All boxes must share one image_id.
MatchResult match_detections(const std::vector<LabeledBox>& dets,
                             const std::vector<LabeledBox>& gts, double iou_threshold);

// 11-point interpolated average precision over recall {0, 0.1, ..., 1.0}.
// Flags are (confidence, is_true_positive) pairs; order does not matter.
// Returns 0 when total_gts == 0.
double ap_11point(std::vector<std::pair<double, bool>> scored_flags, size_t total_gts);

struct EvalCounts {
    size_t images = 0;
    size_t gts = 0;
    size_t dets = 0;
};

struct EvalReport {
    std::map<Category, double> ap_per_class;
    double map = 0.0;
    std::optional<double> avg_bi;  // absent when no matched pairs exist
    EvalCounts counts;
};

using BoxesByImage = std::map<std::string, std::vector<LabeledBox>>;

// Full evaluation: per-class 11-point AP, mAP over {fire, smoke}, and average
// burning intensity over matched true-positive pairs.
EvalReport evaluate(const BoxesByImage& dets_by_image, const BoxesByImage& gts_by_image,
                    double iou_threshold = 0.5, const BIWeights& weights = BIWeights());

// Line-delimited box store: image_id,class,cx,cy,w,h[,confidence] per line.
// Numbers carry up to six fractional digits. Unknown classes are rejected.
std::string format_box_line(const LabeledBox& box);
LabeledBox parse_box_line(const std::string& line, size_t lineno = 0);
void save_box_store(const std::vector<LabeledBox>& boxes, const std::string& path);
std::vector<LabeledBox> load_box_store(const std::string& path);

BoxesByImage group_by_image(const std::vector<LabeledBox>& boxes);

// Canonical decimal with at most six fractional digits (trailing zeros trimmed).
std::string format_number6(double v);

} // namespace fsd
