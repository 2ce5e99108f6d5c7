#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "sha256.hpp"

namespace fsd {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_ints(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string fmt_doubles(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt_double(v[i]);
    }
    return s;
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        raise(Errc::schema, "config key '" + key + "': expected integer, got '" + v + "'");
    }
}

double parse_dbl(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        raise(Errc::schema, "config key '" + key + "': expected number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    raise(Errc::schema, "config key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) out.push_back(cur);
    return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const auto& part : split_csv(v)) out.push_back(parse_int(key, part));
    return out;
}

std::vector<double> parse_dbls(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& part : split_csv(v)) out.push_back(parse_dbl(key, part));
    return out;
}

struct KeyHandler {
    std::function<std::string(const Config&)> get;
    std::function<void(Config&, const std::string&)> set;
};

const std::map<std::string, KeyHandler>& schema() {
    static const std::map<std::string, KeyHandler> s = {
        {"input_h", {[](const Config& c) { return std::to_string(c.input_h); },
                     [](Config& c, const std::string& v) { c.input_h = parse_int("input_h", v); }}},
        {"input_w", {[](const Config& c) { return std::to_string(c.input_w); },
                     [](Config& c, const std::string& v) { c.input_w = parse_int("input_w", v); }}},
        {"strides", {[](const Config& c) { return fmt_ints(c.strides); },
                     [](Config& c, const std::string& v) { c.strides = parse_ints("strides", v); }}},
        {"level_caps", {[](const Config& c) { return fmt_doubles(c.level_caps); },
                        [](Config& c, const std::string& v) { c.level_caps = parse_dbls("level_caps", v); }}},
        {"backbone_widths", {[](const Config& c) { return fmt_ints(c.backbone_widths); },
                             [](Config& c, const std::string& v) {
                                 c.backbone_widths = parse_ints("backbone_widths", v);
                             }}},
        {"head_channels", {[](const Config& c) { return std::to_string(c.head_channels); },
                           [](Config& c, const std::string& v) { c.head_channels = parse_int("head_channels", v); }}},
        {"tower_depth", {[](const Config& c) { return std::to_string(c.tower_depth); },
                         [](Config& c, const std::string& v) { c.tower_depth = parse_int("tower_depth", v); }}},
        {"attention", {[](const Config& c) { return std::string(c.attention ? "true" : "false"); },
                       [](Config& c, const std::string& v) { c.attention = parse_bool("attention", v); }}},
        {"rescale_by_c", {[](const Config& c) { return std::string(c.rescale_by_c ? "true" : "false"); },
                          [](Config& c, const std::string& v) { c.rescale_by_c = parse_bool("rescale_by_c", v); }}},
        {"score_threshold", {[](const Config& c) { return fmt_double(c.score_threshold); },
                             [](Config& c, const std::string& v) { c.score_threshold = parse_dbl("score_threshold", v); }}},
        {"nms_iou", {[](const Config& c) { return fmt_double(c.nms_iou); },
                     [](Config& c, const std::string& v) { c.nms_iou = parse_dbl("nms_iou", v); }}},
        {"max_detections", {[](const Config& c) { return std::to_string(c.max_detections); },
                            [](Config& c, const std::string& v) { c.max_detections = parse_int("max_detections", v); }}},
        {"match_iou", {[](const Config& c) { return fmt_double(c.match_iou); },
                       [](Config& c, const std::string& v) { c.match_iou = parse_dbl("match_iou", v); }}},
        {"bi_w1", {[](const Config& c) { return fmt_double(c.bi_w1); },
                   [](Config& c, const std::string& v) { c.bi_w1 = parse_dbl("bi_w1", v); }}},
        {"bi_w2", {[](const Config& c) { return fmt_double(c.bi_w2); },
                   [](Config& c, const std::string& v) { c.bi_w2 = parse_dbl("bi_w2", v); }}},
        {"steps", {[](const Config& c) { return std::to_string(c.steps); },
                   [](Config& c, const std::string& v) { c.steps = parse_int("steps", v); }}},
        {"batch_size", {[](const Config& c) { return std::to_string(c.batch_size); },
                        [](Config& c, const std::string& v) { c.batch_size = parse_int("batch_size", v); }}},
        {"lr", {[](const Config& c) { return fmt_double(c.lr); },
                [](Config& c, const std::string& v) { c.lr = parse_dbl("lr", v); }}},
        {"momentum", {[](const Config& c) { return fmt_double(c.momentum); },
                      [](Config& c, const std::string& v) { c.momentum = parse_dbl("momentum", v); }}},
        {"weight_decay", {[](const Config& c) { return fmt_double(c.weight_decay); },
                          [](Config& c, const std::string& v) { c.weight_decay = parse_dbl("weight_decay", v); }}},
        {"warmup_steps", {[](const Config& c) { return std::to_string(c.warmup_steps); },
                          [](Config& c, const std::string& v) { c.warmup_steps = parse_int("warmup_steps", v); }}},
        {"hflip", {[](const Config& c) { return std::string(c.hflip ? "true" : "false"); },
                   [](Config& c, const std::string& v) { c.hflip = parse_bool("hflip", v); }}},
    };
    return s;
}

} // namespace

const std::vector<std::string>& Config::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [key, _] : schema()) k.push_back(key);
        return k;
    }();
    return keys;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = schema().find(key);
    if (it == schema().end()) raise(Errc::schema, "unknown config key '" + key + "'");
    it->second.set(*this, value);
}

Config Config::from_map(const std::map<std::string, std::string>& kv) {
    Config c;
    for (const auto& [k, v] : kv) c.set(k, v);
    c.validate();
    return c;
}

void Config::validate() const {
    if (input_h < 32 || input_w < 32) raise(Errc::config, "input size must be at least 32");
    if (strides.empty()) raise(Errc::config, "at least one pyramid stride required");
    for (size_t i = 1; i < strides.size(); ++i)
        if (strides[i] <= strides[i - 1]) raise(Errc::config, "strides must be strictly increasing");
    int max_stride = strides.back();
    if (input_h % max_stride || input_w % max_stride)
        raise(Errc::config, "input size must be divisible by the largest stride");
    if (level_caps.size() + 1 != strides.size())
        raise(Errc::config, "level_caps must have one entry fewer than strides");
    double prev = 0.0;
    for (double cap : level_caps) {
        if (!(cap > prev)) raise(Errc::config, "level caps must be increasing and positive");
        prev = cap;
    }
    if (backbone_widths.size() != 4) raise(Errc::config, "backbone_widths must list 4 stages");
    for (int w : backbone_widths)
        if (w < 1) raise(Errc::config, "backbone widths must be positive");
    head_config().validate();
    if (!(score_threshold >= 0 && score_threshold <= 1)) raise(Errc::config, "score_threshold outside [0,1]");
    if (!(nms_iou >= 0 && nms_iou <= 1)) raise(Errc::config, "nms_iou outside [0,1]");
    if (!(match_iou >= 0 && match_iou <= 1)) raise(Errc::config, "match_iou outside [0,1]");
    if (max_detections < 1) raise(Errc::config, "max_detections must be positive");
    if (steps < 1 || batch_size < 1) raise(Errc::config, "steps and batch_size must be positive");
    if (!(lr > 0)) raise(Errc::config, "lr must be positive");
    if (!(momentum >= 0 && momentum < 1)) raise(Errc::config, "momentum outside [0,1)");
    if (weight_decay < 0) raise(Errc::config, "weight_decay must be non-negative");
    if (warmup_steps < 0) raise(Errc::config, "warmup_steps must be non-negative");
    BIWeights(bi_w1, bi_w2);  // validates the pair
}

HeadConfig Config::head_config() const {
    HeadConfig h;
    h.channels = head_channels;
    h.num_classes = kNumCategories;
    h.tower_depth = tower_depth;
    h.attention_enabled = attention;
    h.rescale_by_c = rescale_by_c;
    return h;
}

std::pair<double, double> Config::level_range(int level) const {
    if (level < 0 || level >= num_levels()) raise(Errc::config, "level out of range");
    double lo = level == 0 ? 0.0 : level_caps[level - 1];
    double hi = level == num_levels() - 1 ? std::numeric_limits<double>::infinity()
                                          : level_caps[level];
    return {lo, hi};
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [key, handler] : schema()) {
        out += key;
        out += '=';
        out += handler.get(*this);
        out += '\n';
    }
    return out;
}

std::string Config::digest() const { return sha256_hex(canonical()); }

Config Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io, "cannot read config file " + path);
    Config c;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        size_t first = trimmed.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (trimmed[first] == '#') continue;
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            raise(Errc::schema, "config line " + std::to_string(lineno) + ": expected key=value");
        auto strip = [](std::string s) {
            size_t b = s.find_first_not_of(" \t");
            size_t e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        c.set(strip(trimmed.substr(0, eq)), strip(trimmed.substr(eq + 1)));
    }
    c.validate();
    return c;
}

void Config::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io, "cannot write config file " + path);
    out << canonical();
}

} // namespace fsd
