#include "train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "assign.hpp"
#include "letterbox.hpp"

namespace fsd {

std::vector<TrainSample> load_train_samples(const Manifest& manifest, const Config& config) {
    std::vector<TrainSample> samples;
    for (const auto& rec : manifest.records) {
        TrainSample s;
        s.image_id = rec.image_id;
        ImageU8 raw = load_image(manifest.resolve_path(rec));
        if (raw.width != rec.width || raw.height != rec.height)
            raise(Errc::schema, "image size on disk disagrees with manifest for '" +
                                    rec.image_id + "'");
        auto boxed = letterbox(raw, config.input_w, config.input_h, config.strides.back());
        s.image = std::move(boxed.image);
        for (const auto& ann : rec.annotations) {
            LabeledBox b = ann;
            b.box = boxed.transform.apply(ann.box);
            s.gts.push_back(std::move(b));
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

namespace {

struct FlippedSample {
    Tensor image;
    std::vector<LabeledBox> gts;
};

FlippedSample materialize(const TrainSample& s, bool flip, const Config& config) {
    FlippedSample out;
    out.image = image_to_tensor(flip ? hflip(s.image) : s.image);
    out.gts = s.gts;
    if (flip)
        for (auto& g : out.gts) g.box.cx = config.input_w - g.box.cx;
    return out;
}

} // namespace

std::vector<StepStats> train(Model& model, const std::vector<TrainSample>& data, uint64_t seed,
                             const std::function<void(const StepStats&)>& on_step) {
    if (data.empty()) raise(Errc::invalid_argument, "training needs a non-empty dataset");
    const Config& cfg = model.config();

    Rng shuffle_rng(derive_seed(seed, "train-shuffle"));
    Rng flip_rng(derive_seed(seed, "train-augment"));

    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), size_t{0});
    shuffle_rng.shuffle(order);
    size_t cursor = 0;

    std::vector<std::vector<double>> momentum(model.params().size());
    for (size_t i = 0; i < momentum.size(); ++i)
        momentum[i].assign(model.params()[i]->w.size(), 0.0);

    std::vector<StepStats> trace;
    trace.reserve(static_cast<size_t>(cfg.steps));

    for (int step = 0; step < cfg.steps; ++step) {
        model.zero_grads();
        LossBundle batch_loss;

        int batch = std::min<int>(cfg.batch_size, static_cast<int>(data.size()));
        for (int b = 0; b < batch; ++b) {
            if (cursor >= order.size()) {
                shuffle_rng.shuffle(order);
                cursor = 0;
            }
            const TrainSample& sample = data[order[cursor++]];
            bool flip = cfg.hflip && flip_rng.bernoulli(0.5);
            FlippedSample fs = materialize(sample, flip, cfg);

            auto targets = assign_targets(fs.gts, cfg);
            auto feats = model.features(fs.image);
            std::vector<Tensor> d_feats;
            LossBundle image_loss;
            for (size_t l = 0; l < feats.size(); ++l) {
                auto out = model.head().forward(feats[l], static_cast<int>(l));
                auto res = level_loss(out, targets.levels[l], targets.num_pos);
                image_loss += res.loss;
                d_feats.push_back(model.head().backward(res.d_cls, res.d_reg, res.d_ctr));
            }
            auto d_maps = model.fpn().backward(d_feats);
            model.backbone().backward(d_maps);
            batch_loss += image_loss;
        }

        double inv_batch = 1.0 / batch;
        batch_loss.cls_loss *= inv_batch;
        batch_loss.reg_loss *= inv_batch;
        batch_loss.centerness_loss *= inv_batch;
        batch_loss.total *= inv_batch;
        if (!std::isfinite(batch_loss.total))
            raise(Errc::numeric,
                  "training diverged: non-finite loss at step " + std::to_string(step));

        double lr = cfg.lr;
        if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
            lr *= static_cast<double>(step + 1) / cfg.warmup_steps;

        for (size_t i = 0; i < model.params().size(); ++i) {
            Param* p = model.params()[i];
            auto& vel = momentum[i];
            for (size_t j = 0; j < p->w.size(); ++j) {
                double g = p->g[j] * inv_batch + cfg.weight_decay * p->w[j];
                vel[j] = cfg.momentum * vel[j] - lr * g;
                p->w[j] += vel[j];
            }
        }

        StepStats stats{step, batch_loss};
        trace.push_back(stats);
        if (on_step) on_step(stats);
    }
    return trace;
}

void write_loss_csv(const std::vector<StepStats>& trace, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(Errc::io, "cannot write loss trace " + tmp);
        out << "step,cls,reg,ctr,total\n";
        char buf[160];
        for (const auto& s : trace) {
            std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g\n", s.step,
                          s.loss.cls_loss, s.loss.reg_loss, s.loss.centerness_loss, s.loss.total);
            out << buf;
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace fsd
