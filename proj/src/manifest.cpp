#include "manifest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rng.hpp"

namespace fsd {

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::test: return "test";
        default: return "all";
    }
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    if (name == "all") return Split::all;
    raise(Errc::schema, "unknown split '" + name + "'");
}

std::string Manifest::resolve_path(const ImageRecord& rec) const {
    std::filesystem::path p(rec.path);
    if (p.is_absolute() || base_dir.empty()) return rec.path;
    return (std::filesystem::path(base_dir) / p).string();
}

void Manifest::validate() const {
    std::set<std::string> ids;
    for (const auto& rec : records) {
        if (rec.width < 1 || rec.height < 1)
            raise(Errc::schema, "record '" + rec.image_id + "' has bad dimensions");
        if (!ids.insert(rec.image_id).second)
            raise(Errc::schema, "duplicate image_id '" + rec.image_id + "'");
        for (const auto& ann : rec.annotations) {
            ann.box.validate();
            if (ann.box.x1() < -1e-9 || ann.box.y1() < -1e-9 ||
                ann.box.x2() > rec.width + 1e-9 || ann.box.y2() > rec.height + 1e-9)
                raise(Errc::schema, "annotation outside image bounds in '" + rec.image_id + "'");
            if (ann.confidence)
                raise(Errc::schema, "ground-truth annotation carries a confidence");
        }
    }
}

BBox clip_box_to_image(const BBox& box, int width, int height) {
    double x1 = std::clamp(box.x1(), 0.0, static_cast<double>(width));
    double y1 = std::clamp(box.y1(), 0.0, static_cast<double>(height));
    double x2 = std::clamp(box.x2(), 0.0, static_cast<double>(width));
    double y2 = std::clamp(box.y2(), 0.0, static_cast<double>(height));
    if (x2 - x1 <= 0 || y2 - y1 <= 0)
        raise(Errc::schema, "annotation has no in-bounds area after clipping");
    return BBox::from_corners(x1, y1, x2, y2);
}

namespace {

std::vector<std::string> split_fields(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

double parse_num(const std::string& s, size_t lineno, const char* what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        raise(Errc::schema, "manifest line " + std::to_string(lineno) + ": malformed " +
                                std::string(what) + " '" + s + "'");
    }
}

} // namespace

void save_manifest(const Manifest& manifest, const std::string& path) {
    manifest.validate();
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(Errc::io, "cannot write manifest " + tmp);
        out << "#manifest name=" << manifest.name << " split=" << split_name(manifest.split)
            << "\n";
        for (const auto& rec : manifest.records) {
            out << rec.image_id << ',' << rec.path << ',' << rec.width << ',' << rec.height << ',';
            for (size_t i = 0; i < rec.annotations.size(); ++i) {
                const auto& ann = rec.annotations[i];
                if (i) out << ';';
                out << category_name(ann.category) << ',' << format_number6(ann.box.cx) << ','
                    << format_number6(ann.box.cy) << ',' << format_number6(ann.box.w) << ','
                    << format_number6(ann.box.h);
            }
            out << '\n';
        }
        if (!out) raise(Errc::io, "failed writing manifest " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot read manifest " + path);
    Manifest m;
    m.base_dir = std::filesystem::path(path).parent_path().string();
    m.name = std::filesystem::path(path).stem().string();

    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hdr(line);
            std::string tok;
            while (hdr >> tok) {
                if (tok.rfind("name=", 0) == 0) m.name = tok.substr(5);
                if (tok.rfind("split=", 0) == 0) m.split = split_from_name(tok.substr(6));
            }
            continue;
        }
        auto head = split_fields(line, ',');
        if (head.size() < 4)
            raise(Errc::schema, "manifest line " + std::to_string(lineno) +
                                    ": expected image_id,path,width,height[,annotations]");
        ImageRecord rec;
        rec.image_id = head[0];
        rec.path = head[1];
        rec.width = static_cast<int>(parse_num(head[2], lineno, "width"));
        rec.height = static_cast<int>(parse_num(head[3], lineno, "height"));

        // everything after the fourth comma is the annotation list
        size_t pos = 0;
        for (int commas = 0; commas < 4; ++commas) pos = line.find(',', pos) + 1;
        std::string ann_text = pos < line.size() ? line.substr(pos) : "";
        if (!ann_text.empty()) {
            for (const auto& ann_str : split_fields(ann_text, ';')) {
                auto parts = split_fields(ann_str, ',');
                if (parts.size() != 5)
                    raise(Errc::schema, "manifest line " + std::to_string(lineno) +
                                            ": annotation needs class,cx,cy,w,h");
                LabeledBox ann;
                ann.category = category_from_name(parts[0]);
                ann.box = clip_box_to_image(
                    BBox(parse_num(parts[1], lineno, "cx"), parse_num(parts[2], lineno, "cy"),
                         parse_num(parts[3], lineno, "w"), parse_num(parts[4], lineno, "h")),
                    rec.width, rec.height);
                ann.image_id = rec.image_id;
                rec.annotations.push_back(std::move(ann));
            }
        }
        m.records.push_back(std::move(rec));
    }
    m.validate();
    return m;
}

std::pair<Manifest, Manifest> split_manifest(const Manifest& manifest, double train_fraction,
                                             uint64_t seed) {
    if (manifest.records.empty()) raise(Errc::io, "cannot split an empty manifest");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        raise(Errc::invalid_argument, "train fraction must be in (0, 1)");

    std::vector<size_t> order(manifest.records.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, "manifest-split"));
    rng.shuffle(order);

    size_t n_train = static_cast<size_t>(
        std::llround(train_fraction * static_cast<double>(manifest.records.size())));
    n_train = std::min(n_train, manifest.records.size());

    Manifest train, test;
    train.name = manifest.name;
    test.name = manifest.name;
    train.split = Split::train;
    test.split = Split::test;
    train.base_dir = manifest.base_dir;
    test.base_dir = manifest.base_dir;
    for (size_t i = 0; i < order.size(); ++i) {
        const auto& rec = manifest.records[order[i]];
        (i < n_train ? train : test).records.push_back(rec);
    }
    return {std::move(train), std::move(test)};
}

BoxesByImage manifest_gts(const Manifest& manifest) {
    BoxesByImage out;
    for (const auto& rec : manifest.records) {
        auto& list = out[rec.image_id];  // negative images still create a key
        for (const auto& ann : rec.annotations) list.push_back(ann);
    }
    return out;
}

} // namespace fsd
