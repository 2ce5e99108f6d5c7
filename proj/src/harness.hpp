#pragma once

#include <functional>
#include <optional>

#include "model.hpp"
#include "train.hpp"

namespace fsd {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Reproducibility record every output directory carries: config digest, seed,
// toolkit version, and optional extra lines (e.g. checkpoint digest).
void write_run_record(const std::string& dir, const Config& config, uint64_t seed,
                      const std::vector<std::string>& extra = {});

// Deterministic inference over a manifest: letterbox, forward, decode + NMS,
// boxes mapped back to original image coordinates, store sorted by image_id
// then confidence. Returns the detections it wrote.
std::vector<LabeledBox> run_inference(Model& model, const Manifest& manifest,
                                      const std::string& store_path);

// Evaluation report of a detection store against a manifest's ground truth.
EvalReport report_store(const std::vector<LabeledBox>& dets, const Manifest& manifest,
                        double match_iou, const BIWeights& weights);

std::string format_report_text(const EvalReport& report, const std::string& dataset);
std::string format_report_records(const EvalReport& report, const std::string& dataset);

struct AblationRow {
    std::string variant;  // "atdh" or "baseline"
    std::string dataset;
    uint64_t seed = 0;
    bool failed = false;
    double fire_ap = 0.0, smoke_ap = 0.0, map = 0.0;
};

struct AblationSummary {
    std::string variant;
    double mean_fire = 0.0, mean_smoke = 0.0, mean_map = 0.0;
    double min_map = 0.0, max_map = 0.0;
    int runs = 0, failures = 0;
};

struct AblationTable {
    std::vector<AblationRow> rows;        // ordered by (variant, seed)
    std::vector<AblationSummary> summary; // one per variant
};

// Head-comparison protocol: trains attention-on and attention-off variants on
// identical data orders per seed, evaluates each on the test manifest, and
// aggregates mean and min/max per variant. Diverged runs are flagged, not
// fatal. `on_progress` receives one line per completed run.
AblationTable ablate(const Manifest& train_manifest, const Manifest& test_manifest,
                     const Config& base_config, const std::vector<uint64_t>& seeds,
                     const std::function<void(const std::string&)>& on_progress = nullptr);

std::string format_ablation_table(const AblationTable& table);
std::string format_ablation_records(const AblationTable& table);

// Gradient-weighted class activation map at the post-attention feature map of
// one pyramid level: channel weights are the spatial means of the class-score
// gradient, the weighted sum is rectified, normalized to [0, 1] (all-zero when
// the class has no positive response), and upsampled to the input size.
Tensor cam_map(Model& model, const Tensor& image, Category category, int level);

ImageU8 cam_to_gray(const Tensor& heat);
ImageU8 cam_overlay(const ImageU8& image, const Tensor& heat);

} // namespace fsd
