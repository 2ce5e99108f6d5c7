#pragma once

#include <functional>

#include "image.hpp"
#include "loss.hpp"
#include "manifest.hpp"
#include "model.hpp"

namespace fsd {

// One training image, already letterboxed to the network input size.
struct TrainSample {
    std::string image_id;
    ImageU8 image;
    std::vector<LabeledBox> gts;  // in network-input coordinates
};

struct StepStats {
    int step = 0;
    LossBundle loss;
};

// Manifest records letterboxed to the configured input size.
std::vector<TrainSample> load_train_samples(const Manifest& manifest, const Config& config);

// Plain stochastic gradient descent with momentum. Deterministic given
// (model init, data, seed): shuffling and the horizontal-flip augmentation
// draw from seed-derived streams. Non-finite losses abort with a numeric
// error naming the step.
std::vector<StepStats> train(Model& model, const std::vector<TrainSample>& data, uint64_t seed,
                             const std::function<void(const StepStats&)>& on_step = nullptr);

// Loss trace rows as stable text: "step,cls,reg,ctr,total".
void write_loss_csv(const std::vector<StepStats>& trace, const std::string& path);

} // namespace fsd
