#include "model.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fsd {

Model::Model(const Config& config) : config_(config) {
    config_.validate();
    if (config_.num_levels() != 3)
        raise(Errc::config, "the backbone/pyramid assembly expects exactly 3 strides");
    backbone_ = Backbone(config_.backbone_widths);
    std::vector<int> neck_in(config_.backbone_widths.begin() + 1, config_.backbone_widths.end());
    fpn_ = FeaturePyramid(neck_in, config_.head_channels);
    head_ = Head(config_.head_config(), config_.num_levels());

    backbone_.set_name("backbone");
    fpn_.set_name("fpn");
    head_.set_name("head");
    backbone_.collect(params_);
    fpn_.collect(params_);
    head_.collect(params_);
}

void Model::init(uint64_t seed) {
    Rng rng(derive_seed(seed, "model-init"));
    backbone_.init(rng);
    fpn_.init(rng);
    head_.init(rng);
}

void Model::zero_grads() {
    for (Param* p : params_) p->zero_grad();
}

std::vector<Tensor> Model::features(const Tensor& image) {
    return fpn_.forward(backbone_.forward(image));
}

std::vector<HeadOutput> Model::forward(const Tensor& image) {
    auto feats = features(image);
    std::vector<HeadOutput> outs;
    for (size_t l = 0; l < feats.size(); ++l)
        outs.push_back(head_.forward(feats[l], static_cast<int>(l)));
    return outs;
}

uint64_t count_params(const std::vector<Param*>& params) {
    uint64_t n = 0;
    for (const Param* p : params) n += p->count();
    return n;
}

ModelStats Model::stats(int in_h, int in_w) const {
    if (in_h % config_.strides.back() || in_w % config_.strides.back())
        raise(Errc::config, "stats input size must be divisible by the largest stride");
    ModelStats s;
    s.param_count = count_params(const_cast<Model*>(this)->params_);
    s.mult_adds = backbone_.mult_adds(in_h, in_w);
    std::vector<std::pair<int, int>> sizes;
    for (int stride : config_.strides) sizes.push_back({in_h / stride, in_w / stride});
    s.mult_adds += fpn_.mult_adds(sizes);
    for (auto [h, w] : sizes) s.mult_adds += head_.mult_adds(h, w);
    return s;
}

namespace {

constexpr char kMagic[8] = {'F', 'S', 'D', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) raise(Errc::io, "truncated checkpoint");
    return v;
}

} // namespace

void Model::save_checkpoint(const std::string& path) const {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(Errc::io, "cannot write checkpoint " + tmp);
        out.write(kMagic, sizeof(kMagic));
        write_pod<uint32_t>(out, 1);  // format version
        std::string cfg = config_.canonical();
        write_pod<uint32_t>(out, static_cast<uint32_t>(cfg.size()));
        out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
        write_pod<uint32_t>(out, static_cast<uint32_t>(params_.size()));
        for (const Param* p : params_) {
            write_pod<uint16_t>(out, static_cast<uint16_t>(p->name.size()));
            out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
            write_pod<uint8_t>(out, static_cast<uint8_t>(p->shape.size()));
            for (int d : p->shape) write_pod<uint32_t>(out, static_cast<uint32_t>(d));
            out.write(reinterpret_cast<const char*>(p->w.data()),
                      static_cast<std::streamsize>(p->w.size() * sizeof(double)));
        }
        if (!out) raise(Errc::io, "failed writing checkpoint " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::unique_ptr<Model> Model::load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot read checkpoint " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        raise(Errc::schema, "not a checkpoint file: " + path);
    uint32_t version = read_pod<uint32_t>(in);
    if (version != 1) raise(Errc::schema, "unsupported checkpoint version");

    uint32_t cfg_len = read_pod<uint32_t>(in);
    std::string cfg_text(cfg_len, '\0');
    in.read(cfg_text.data(), cfg_len);
    if (!in) raise(Errc::io, "truncated checkpoint config");

    std::map<std::string, std::string> kv;
    std::istringstream cfg_in(cfg_text);
    std::string line;
    while (std::getline(cfg_in, line)) {
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) raise(Errc::schema, "malformed checkpoint config");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto model = std::make_unique<Model>(Config::from_map(kv));

    uint32_t count = read_pod<uint32_t>(in);
    if (count != model->params_.size())
        raise(Errc::config, "checkpoint parameter count does not match config");
    for (Param* p : model->params_) {
        uint16_t name_len = read_pod<uint16_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (name != p->name)
            raise(Errc::config, "checkpoint parameter '" + name + "' does not match expected '" +
                                    p->name + "'");
        uint8_t ndim = read_pod<uint8_t>(in);
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(read_pod<uint32_t>(in));
        if (shape != p->shape) raise(Errc::config, "checkpoint shape mismatch for '" + name + "'");
        in.read(reinterpret_cast<char*>(p->w.data()),
                static_cast<std::streamsize>(p->w.size() * sizeof(double)));
        if (!in) raise(Errc::io, "truncated checkpoint data for '" + name + "'");
    }
    return model;
}

} // namespace fsd
