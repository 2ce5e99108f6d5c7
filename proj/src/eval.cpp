#include "eval.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fsd {

const char* category_name(Category c) { return c == Category::fire ? "fire" : "smoke"; }

Category category_from_name(const std::string& name) {
    if (name == "fire") return Category::fire;
    if (name == "smoke") return Category::smoke;
    raise(Errc::schema, "unknown class '" + name + "' (expected fire or smoke)");
}

namespace {

void check_single_image(const std::vector<LabeledBox>& dets, const std::vector<LabeledBox>& gts) {
    const std::string* id = nullptr;
    for (const auto* list : {&dets, &gts})
        for (const auto& b : *list) {
            if (!id)
                id = &b.image_id;
            else if (b.image_id != *id)
                raise(Errc::protocol, "match_detections requires a single image_id, got '" +
                                          *id + "' and '" + b.image_id + "'");
        }
}

} // namespace

MatchResult match_detections(const std::vector<LabeledBox>& dets,
                             const std::vector<LabeledBox>& gts, double iou_threshold) {
    check_single_image(dets, gts);
    for (const auto& d : dets) d.validate();
    for (const auto& g : gts) g.validate();

    // Confidence-descending order, stable so equal scores keep insertion order.
    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return dets[a].confidence.value_or(0.0) > dets[b].confidence.value_or(0.0);
    });

    std::vector<bool> gt_taken(gts.size(), false);
    std::vector<bool> det_matched(dets.size(), false);
    MatchResult result;
    for (size_t di : order) {
        double best_iou = 0.0;
        size_t best_gt = gts.size();
        for (size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_taken[gi] || gts[gi].category != dets[di].category) continue;
            double v = iou(dets[di].box, gts[gi].box);
            if (v > best_iou) {  // strict: ties keep the lower index found first
                best_iou = v;
                best_gt = gi;
            }
        }
        if (best_gt < gts.size() && best_iou >= iou_threshold) {
            gt_taken[best_gt] = true;
            det_matched[di] = true;
            result.pairs.push_back({di, best_gt, best_iou});
        }
    }
    for (size_t di = 0; di < dets.size(); ++di)
        if (!det_matched[di]) result.unmatched_detections.push_back(di);
    for (size_t gi = 0; gi < gts.size(); ++gi)
        if (!gt_taken[gi]) result.unmatched_gts.push_back(gi);
    return result;
}

double ap_11point(std::vector<std::pair<double, bool>> scored_flags, size_t total_gts) {
    if (total_gts == 0) return 0.0;
    std::stable_sort(scored_flags.begin(), scored_flags.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    size_t n = scored_flags.size();
    std::vector<double> precision(n), recall(n);
    size_t tp = 0;
    for (size_t i = 0; i < n; ++i) {
        if (scored_flags[i].second) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(total_gts);
    }

    // Interpolated precision at recall r is the max precision at any point
    // whose recall is >= r; running max from the tail makes this O(n + 11).
    std::vector<double> interp(n);
    double running = 0.0;
    for (size_t i = n; i-- > 0;) {
        running = std::max(running, precision[i]);
        interp[i] = running;
    }

    double ap = 0.0;
    for (int k = 0; k <= 10; ++k) {
        double r = k / 10.0;
        double p = 0.0;
        // first index whose recall >= r (recall is non-decreasing)
        auto it = std::lower_bound(recall.begin(), recall.end(), r - 1e-12);
        if (it != recall.end()) p = interp[static_cast<size_t>(it - recall.begin())];
        ap += p;
    }
    return ap / 11.0;
}

EvalReport evaluate(const BoxesByImage& dets_by_image, const BoxesByImage& gts_by_image,
                    double iou_threshold, const BIWeights& weights) {
    weights.validate();
    EvalReport report;

    std::map<std::string, const std::vector<LabeledBox>*> det_lookup;
    for (const auto& [id, boxes] : dets_by_image) det_lookup[id] = &boxes;

    std::vector<std::string> image_ids;
    for (const auto& [id, _] : gts_by_image) image_ids.push_back(id);
    for (const auto& [id, _] : dets_by_image)
        if (!gts_by_image.count(id)) image_ids.push_back(id);
    std::sort(image_ids.begin(), image_ids.end());

    static const std::vector<LabeledBox> kEmpty;
    std::map<Category, std::vector<std::pair<double, bool>>> flags;
    std::map<Category, size_t> gt_counts;
    flags[Category::fire];
    flags[Category::smoke];
    gt_counts[Category::fire] = 0;
    gt_counts[Category::smoke] = 0;

    double bi_sum = 0.0;
    size_t bi_count = 0;

    for (const auto& id : image_ids) {
        auto git = gts_by_image.find(id);
        const auto& gts = git == gts_by_image.end() ? kEmpty : git->second;
        auto dit = det_lookup.find(id);
        const auto& dets = dit == det_lookup.end() ? kEmpty : *dit->second;
        for (const auto& g : gts) ++gt_counts[g.category];
        report.counts.gts += gts.size();
        report.counts.dets += dets.size();

        MatchResult m = match_detections(dets, gts, iou_threshold);
        std::vector<bool> is_tp(dets.size(), false);
        for (const auto& p : m.pairs) {
            is_tp[p.det_index] = true;
            bi_sum += burning_intensity(dets[p.det_index].box, gts[p.gt_index].box, weights);
            ++bi_count;
        }
        for (size_t di = 0; di < dets.size(); ++di)
            flags[dets[di].category].push_back({dets[di].confidence.value_or(0.0), is_tp[di]});
    }
    report.counts.images = image_ids.size();

    double ap_sum = 0.0;
    for (auto cat : {Category::fire, Category::smoke}) {
        double ap = ap_11point(flags[cat], gt_counts[cat]);
        report.ap_per_class[cat] = ap;
        ap_sum += ap;
    }
    report.map = ap_sum / kNumCategories;
    if (bi_count > 0) report.avg_bi = bi_sum / static_cast<double>(bi_count);
    return report;
}

std::string format_number6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    std::string s(buf);
    size_t dot = s.find('.');
    size_t last = s.find_last_not_of('0');
    if (last == dot) last = dot - 1;  // drop a bare trailing dot too
    s.erase(last + 1);
    if (s == "-0") s = "0";
    return s;
}

std::string format_box_line(const LabeledBox& b) {
    std::string line = b.image_id;
    line += ',';
    line += category_name(b.category);
    for (double v : {b.box.cx, b.box.cy, b.box.w, b.box.h}) {
        line += ',';
        line += format_number6(v);
    }
    if (b.confidence) {
        line += ',';
        line += format_number6(*b.confidence);
    }
    return line;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double parse_double(const std::string& s, size_t lineno, const char* what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        std::ostringstream msg;
        msg << "malformed " << what << " '" << s << "'";
        if (lineno) msg << " at line " << lineno;
        raise(Errc::schema, msg.str());
    }
}

} // namespace

LabeledBox parse_box_line(const std::string& line, size_t lineno) {
    auto fields = split(line, ',');
    if (fields.size() != 6 && fields.size() != 7) {
        std::ostringstream msg;
        msg << "expected 6 or 7 comma-separated fields, got " << fields.size();
        if (lineno) msg << " at line " << lineno;
        raise(Errc::schema, msg.str());
    }
    LabeledBox b;
    b.image_id = fields[0];
    b.category = category_from_name(fields[1]);
    double cx = parse_double(fields[2], lineno, "cx");
    double cy = parse_double(fields[3], lineno, "cy");
    double w = parse_double(fields[4], lineno, "w");
    double h = parse_double(fields[5], lineno, "h");
    b.box = BBox(cx, cy, w, h);
    if (fields.size() == 7) b.confidence = parse_double(fields[6], lineno, "confidence");
    b.validate();
    return b;
}

void save_box_store(const std::vector<LabeledBox>& boxes, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(Errc::io, "cannot write " + tmp);
        for (const auto& b : boxes) out << format_box_line(b) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

std::vector<LabeledBox> load_box_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot read " + path);
    std::vector<LabeledBox> boxes;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        boxes.push_back(parse_box_line(line, lineno));
    }
    return boxes;
}

BoxesByImage group_by_image(const std::vector<LabeledBox>& boxes) {
    BoxesByImage out;
    for (const auto& b : boxes) out[b.image_id].push_back(b);
    return out;
}

} // namespace fsd
