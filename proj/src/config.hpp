#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "eval.hpp"
#include "head.hpp"

namespace fsd {

// Flat key=value configuration for the detector, training loop, and metric
// defaults. Unknown keys are schema errors; precedence is CLI > file > defaults.
struct Config {
    int input_h = 256;
    int input_w = 256;
    std::vector<int> strides = {8, 16, 32};
    // per-level max regression distance in pixels; the last level is unbounded
    std::vector<double> level_caps = {64.0, 128.0};
    std::vector<int> backbone_widths = {16, 32, 64, 128};
    int head_channels = 64;
    int tower_depth = 4;
    bool attention = true;
    bool rescale_by_c = true;
    double score_threshold = 0.05;
    double nms_iou = 0.6;
    int max_detections = 100;
    double match_iou = 0.5;
    double bi_w1 = 0.5;
    double bi_w2 = 0.5;
    int steps = 500;
    int batch_size = 4;
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.0;
    double grad_clip = 8.0;  // global L2 norm cap, 0 disables
    int warmup_steps = 20;
    bool hflip = true;

    void validate() const;
    HeadConfig head_config() const;
    int num_levels() const { return static_cast<int>(strides.size()); }
    // regression range (lo, hi] of a level, in pixels; hi is +inf for the last
    std::pair<double, double> level_range(int level) const;

    // The canonical serialization: sorted keys, one per line, lossless numbers.
    std::string canonical() const;
    std::string digest() const;  // sha256 of canonical()

    void set(const std::string& key, const std::string& value);
    static Config from_map(const std::map<std::string, std::string>& kv);
    static Config load_file(const std::string& path);
    void save_file(const std::string& path) const;
    static const std::vector<std::string>& known_keys();
};

} // namespace fsd
