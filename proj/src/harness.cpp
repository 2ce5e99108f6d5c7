#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "decode.hpp"
#include "letterbox.hpp"

namespace fsd {

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}

} // namespace

void write_run_record(const std::string& dir, const Config& config, uint64_t seed,
                      const std::vector<std::string>& extra) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / "run_record.txt", std::ios::binary);
    if (!out) raise(Errc::io, "cannot write run record in " + dir);
    out << "config_digest=" << config.digest() << "\n";
    out << "seed=" << seed << "\n";
    out << "toolkit_version=" << kToolkitVersion << "\n";
    for (const auto& line : extra) out << line << "\n";
}

std::vector<LabeledBox> run_inference(Model& model, const Manifest& manifest,
                                      const std::string& store_path) {
    const Config& cfg = model.config();
    std::vector<const ImageRecord*> records;
    for (const auto& rec : manifest.records) records.push_back(&rec);
    std::sort(records.begin(), records.end(),
              [](const ImageRecord* a, const ImageRecord* b) { return a->image_id < b->image_id; });

    std::vector<LabeledBox> all;
    for (const ImageRecord* rec : records) {
        ImageU8 raw = load_image(manifest.resolve_path(*rec));
        auto boxed = letterbox(raw, cfg.input_w, cfg.input_h, cfg.strides.back());
        auto outs = model.forward(image_to_tensor(boxed.image));
        auto dets = postprocess(outs, cfg, rec->image_id);
        for (auto& d : dets) {
            BBox orig = boxed.transform.invert(d.box);
            // clip to the original image; padding-region slivers vanish here
            double x1 = std::clamp(orig.x1(), 0.0, static_cast<double>(rec->width));
            double y1 = std::clamp(orig.y1(), 0.0, static_cast<double>(rec->height));
            double x2 = std::clamp(orig.x2(), 0.0, static_cast<double>(rec->width));
            double y2 = std::clamp(orig.y2(), 0.0, static_cast<double>(rec->height));
            if (x2 - x1 <= 0 || y2 - y1 <= 0) continue;
            d.box = BBox::from_corners(x1, y1, x2, y2);
            all.push_back(std::move(d));
        }
    }
    if (!store_path.empty()) save_box_store(all, store_path);
    return all;
}

EvalReport report_store(const std::vector<LabeledBox>& dets, const Manifest& manifest,
                        double match_iou, const BIWeights& weights) {
    auto gts = manifest_gts(manifest);
    for (const auto& d : dets)
        if (!gts.count(d.image_id))
            raise(Errc::protocol, "detection references unknown image_id '" + d.image_id + "'");
    return evaluate(group_by_image(dets), gts, match_iou, weights);
}

std::string format_report_text(const EvalReport& r, const std::string& dataset) {
    std::ostringstream out;
    out << "dataset: " << dataset << "\n";
    out << "images: " << r.counts.images << "  gts: " << r.counts.gts
        << "  dets: " << r.counts.dets << "\n";
    out << "Fire AP   Smoke AP  mAP       avg BI\n";
    out << pct(r.ap_per_class.at(Category::fire)) << "     " << pct(r.ap_per_class.at(Category::smoke))
        << "     " << pct(r.map) << "     " << (r.avg_bi ? pct(*r.avg_bi) : "n/a") << "\n";
    return out.str();
}

std::string format_report_records(const EvalReport& r, const std::string& dataset) {
    char buf[256];
    std::string out;
    out += "dataset=" + dataset + "\n";
    std::snprintf(buf, sizeof(buf), "fire_ap=%.6f\nsmoke_ap=%.6f\nmap=%.6f\n",
                  r.ap_per_class.at(Category::fire), r.ap_per_class.at(Category::smoke), r.map);
    out += buf;
    if (r.avg_bi)
        std::snprintf(buf, sizeof(buf), "avg_bi=%.6f\n", *r.avg_bi);
    else
        std::snprintf(buf, sizeof(buf), "avg_bi=absent\n");
    out += buf;
    std::snprintf(buf, sizeof(buf), "images=%zu\ngts=%zu\ndets=%zu\n", r.counts.images,
                  r.counts.gts, r.counts.dets);
    out += buf;
    return out;
}

AblationTable ablate(const Manifest& train_manifest, const Manifest& test_manifest,
                     const Config& base_config, const std::vector<uint64_t>& seeds,
                     const std::function<void(const std::string&)>& on_progress) {
    if (seeds.empty()) raise(Errc::protocol, "ablation needs at least one seed");
    auto train_samples = load_train_samples(train_manifest, base_config);

    AblationTable table;
    for (bool attention : {true, false}) {
        std::string variant = attention ? "atdh" : "baseline";
        AblationSummary summary;
        summary.variant = variant;
        double min_map = 2.0, max_map = -1.0;
        for (uint64_t seed : seeds) {
            Config cfg = base_config;
            cfg.attention = attention;
            AblationRow row;
            row.variant = variant;
            row.dataset = test_manifest.name;
            row.seed = seed;
            try {
                Model model(cfg);
                model.init(seed);
                train(model, train_samples, seed);
                auto dets = run_inference(model, test_manifest, "");
                auto rep = report_store(dets, test_manifest, cfg.match_iou,
                                        BIWeights(cfg.bi_w1, cfg.bi_w2));
                row.fire_ap = rep.ap_per_class.at(Category::fire);
                row.smoke_ap = rep.ap_per_class.at(Category::smoke);
                row.map = rep.map;
            } catch (const Error& e) {
                if (e.code() != Errc::numeric) throw;  // only divergence is survivable
                row.failed = true;
            }
            if (on_progress)
                on_progress(variant + " seed " + std::to_string(seed) +
                            (row.failed ? ": diverged" : ": mAP " + pct(row.map)));
            if (!row.failed) {
                summary.mean_fire += row.fire_ap;
                summary.mean_smoke += row.smoke_ap;
                summary.mean_map += row.map;
                min_map = std::min(min_map, row.map);
                max_map = std::max(max_map, row.map);
                ++summary.runs;
            } else {
                ++summary.failures;
            }
            table.rows.push_back(row);
        }
        if (summary.runs > 0) {
            summary.mean_fire /= summary.runs;
            summary.mean_smoke /= summary.runs;
            summary.mean_map /= summary.runs;
            summary.min_map = min_map;
            summary.max_map = max_map;
        }
        table.summary.push_back(summary);
    }
    return table;
}

std::string format_ablation_table(const AblationTable& table) {
    std::ostringstream out;
    out << "variant    seed      Fire      Smoke     mAP\n";
    for (const auto& row : table.rows) {
        char buf[160];
        if (row.failed)
            std::snprintf(buf, sizeof(buf), "%-10s %-9llu DIVERGED  DIVERGED  DIVERGED\n",
                          row.variant.c_str(), static_cast<unsigned long long>(row.seed));
        else
            std::snprintf(buf, sizeof(buf), "%-10s %-9llu %-9s %-9s %-9s\n", row.variant.c_str(),
                          static_cast<unsigned long long>(row.seed), pct(row.fire_ap).c_str(),
                          pct(row.smoke_ap).c_str(), pct(row.map).c_str());
        out << buf;
    }
    out << "\nvariant    runs  Fire(mean) Smoke(mean) mAP(mean) mAP(min..max)\n";
    for (const auto& s : table.summary) {
        std::string note = s.failures ? "  [" + std::to_string(s.failures) + " diverged]" : "";
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%-10s %-5d %-10s %-11s %-9s %s..%s%s\n",
                      s.variant.c_str(), s.runs, pct(s.mean_fire).c_str(),
                      pct(s.mean_smoke).c_str(), pct(s.mean_map).c_str(), pct(s.min_map).c_str(),
                      pct(s.max_map).c_str(), note.c_str());
        out << buf;
    }
    return out.str();
}

std::string format_ablation_records(const AblationTable& table) {
    std::string out;
    char buf[256];
    for (const auto& row : table.rows) {
        if (row.failed)
            std::snprintf(buf, sizeof(buf), "row variant=%s dataset=%s seed=%llu failed=1\n",
                          row.variant.c_str(), row.dataset.c_str(),
                          static_cast<unsigned long long>(row.seed));
        else
            std::snprintf(buf, sizeof(buf),
                          "row variant=%s dataset=%s seed=%llu fire_ap=%.6f smoke_ap=%.6f map=%.6f\n",
                          row.variant.c_str(), row.dataset.c_str(),
                          static_cast<unsigned long long>(row.seed), row.fire_ap, row.smoke_ap,
                          row.map);
        out += buf;
    }
    for (const auto& s : table.summary) {
        std::snprintf(buf, sizeof(buf),
                      "summary variant=%s runs=%d failures=%d mean_fire=%.6f mean_smoke=%.6f "
                      "mean_map=%.6f min_map=%.6f max_map=%.6f\n",
                      s.variant.c_str(), s.runs, s.failures, s.mean_fire, s.mean_smoke, s.mean_map,
                      s.min_map, s.max_map);
        out += buf;
    }
    return out;
}

namespace {

Tensor resize_bilinear_plane(const Tensor& t, int out_h, int out_w) {
    Tensor out(1, out_h, out_w);
    double sx = static_cast<double>(t.w) / out_w;
    double sy = static_cast<double>(t.h) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y1 = std::min(y0 + 1, t.h - 1);
        y0 = std::clamp(y0, 0, t.h - 1);
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x1 = std::min(x0 + 1, t.w - 1);
            x0 = std::clamp(x0, 0, t.w - 1);
            out.at(0, y, x) = (1 - wy) * ((1 - wx) * t.at(0, y0, x0) + wx * t.at(0, y0, x1)) +
                              wy * ((1 - wx) * t.at(0, y1, x0) + wx * t.at(0, y1, x1));
        }
    }
    return out;
}

} // namespace

Tensor cam_map(Model& model, const Tensor& image, Category category, int level) {
    const Config& cfg = model.config();
    if (level < 0 || level >= cfg.num_levels()) raise(Errc::config, "cam: level out of range");
    auto feats = model.features(image);
    auto out = model.head().forward(feats[static_cast<size_t>(level)], level);

    // gradient of the summed class logit w.r.t. the post-attention map
    Tensor d_cls(out.cls_logits.c, out.cls_logits.h, out.cls_logits.w);
    for (int iy = 0; iy < d_cls.h; ++iy)
        for (int ix = 0; ix < d_cls.w; ++ix)
            d_cls.at(static_cast<int>(category), iy, ix) = 1.0;
    Tensor d_merged = model.head().backward_cls_to_merged(d_cls);
    model.zero_grads();  // discard the projection gradients this produced

    const Tensor& fmap = model.head().post_attention_map();
    Tensor heat(1, fmap.h, fmap.w);
    const size_t plane = fmap.plane();
    for (int c = 0; c < fmap.c; ++c) {
        double wsum = 0.0;
        const double* g = d_merged.channel(c);
        for (size_t i = 0; i < plane; ++i) wsum += g[i];
        double weight = wsum / static_cast<double>(plane);
        const double* a = fmap.channel(c);
        for (size_t i = 0; i < plane; ++i) heat.v[i] += weight * a[i];
    }
    double mx = 0.0;
    for (double& v : heat.v) {
        v = std::max(v, 0.0);
        mx = std::max(mx, v);
    }
    if (mx > 0)
        for (double& v : heat.v) v /= mx;
    return resize_bilinear_plane(heat, image.h, image.w);
}

ImageU8 cam_to_gray(const Tensor& heat) {
    ImageU8 out(heat.w, heat.h, 1);
    for (int y = 0; y < heat.h; ++y)
        for (int x = 0; x < heat.w; ++x)
            out.at(y, x, 0) = static_cast<uint8_t>(
                std::lround(std::clamp(heat.at(0, y, x), 0.0, 1.0) * 255.0));
    return out;
}

ImageU8 cam_overlay(const ImageU8& image, const Tensor& heat) {
    if (image.width != heat.w || image.height != heat.h)
        raise(Errc::config, "overlay: heatmap/image size mismatch");
    ImageU8 out(image.width, image.height, 3);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            double h = std::clamp(heat.at(0, y, x), 0.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                double base = image.at(y, x, image.channels == 3 ? c : 0) * 0.5;
                double glow = c == 0 ? 255.0 * h * 0.5 : (c == 1 ? 64.0 * h * 0.5 : 0.0);
                out.at(y, x, c) = static_cast<uint8_t>(std::lround(std::min(255.0, base + glow)));
            }
        }
    return out;
}

} // namespace fsd
