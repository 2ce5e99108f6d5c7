#pragma once

#include <memory>

#include "backbone.hpp"
#include "config.hpp"
#include "fpn.hpp"
#include "head.hpp"

namespace fsd {

struct ModelStats {
    uint64_t param_count = 0;
    uint64_t mult_adds = 0;  // forward multiply-adds at one input size
};

// The full anchor-free detector: backbone, top-down pyramid, shared head.
class Model {
public:
    explicit Model(const Config& config);

    void init(uint64_t seed);
    const Config& config() const { return config_; }

    Backbone& backbone() { return backbone_; }
    FeaturePyramid& fpn() { return fpn_; }
    Head& head() { return head_; }

    std::vector<Param*>& params() { return params_; }
    void zero_grads();

    // backbone + pyramid features, fine -> coarse
    std::vector<Tensor> features(const Tensor& image);
    // full inference pass over all levels
    std::vector<HeadOutput> forward(const Tensor& image);

    ModelStats stats(int in_h, int in_w) const;

    // Versioned named-array checkpoint with the config embedded. Loading
    // rebuilds the model from the stored config and validates every shape.
    void save_checkpoint(const std::string& path) const;
    static std::unique_ptr<Model> load_checkpoint(const std::string& path);

private:
    Config config_;
    Backbone backbone_;
    FeaturePyramid fpn_;
    Head head_;
    std::vector<Param*> params_;
};

uint64_t count_params(const std::vector<Param*>& params);

} // namespace fsd
