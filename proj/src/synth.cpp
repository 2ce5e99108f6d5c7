#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "rng.hpp"

namespace fsd {

BackgroundMode background_from_name(const std::string& name) {
    if (name == "solid") return BackgroundMode::solid;
    if (name == "gradient") return BackgroundMode::gradient;
    if (name == "textured") return BackgroundMode::textured;
    raise(Errc::schema, "unknown background mode '" + name + "'");
}

const char* background_name(BackgroundMode m) {
    switch (m) {
        case BackgroundMode::solid: return "solid";
        case BackgroundMode::gradient: return "gradient";
        default: return "textured";
    }
}

namespace {

struct Color {
    double r, g, b;
};

Color lerp(const Color& a, const Color& b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

// Smooth value noise from a small random lattice, bilinear interpolation.
struct ValueNoise {
    int n = 5;
    std::vector<double> lattice;

    ValueNoise(Rng& rng, int cells) : n(cells), lattice(static_cast<size_t>(cells) * cells) {
        for (auto& v : lattice) v = rng.uniform();
    }
    // u, v in [0, 1]
    double at(double u, double v) const {
        double fu = u * (n - 1), fv = v * (n - 1);
        int iu = std::min(static_cast<int>(fu), n - 2);
        int iv = std::min(static_cast<int>(fv), n - 2);
        double du = fu - iu, dv = fv - iv;
        auto L = [&](int y, int x) { return lattice[static_cast<size_t>(y) * n + x]; };
        return (1 - dv) * ((1 - du) * L(iv, iu) + du * L(iv, iu + 1)) +
               dv * ((1 - du) * L(iv + 1, iu) + du * L(iv + 1, iu + 1));
    }
};

struct FloatImage {
    int w, h;
    std::vector<double> rgb;  // interleaved
    double* px(int y, int x) { return &rgb[(static_cast<size_t>(y) * w + x) * 3]; }
};

FloatImage render_background(const SynthSpec& spec, int index) {
    Rng rng(derive_seed(spec.seed, "synth-bg-" + std::to_string(index)));
    FloatImage img{spec.image_w, spec.image_h,
                   std::vector<double>(static_cast<size_t>(spec.image_w) * spec.image_h * 3)};
    Color a{rng.uniform(40, 200), rng.uniform(40, 200), rng.uniform(40, 200)};
    Color b{rng.uniform(40, 200), rng.uniform(40, 200), rng.uniform(40, 200)};
    bool horizontal = rng.bernoulli(0.5);
    ValueNoise noise(rng, 5);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double u = img.w > 1 ? static_cast<double>(x) / (img.w - 1) : 0.0;
            double v = img.h > 1 ? static_cast<double>(y) / (img.h - 1) : 0.0;
            Color c = a;
            switch (spec.background) {
                case BackgroundMode::solid: break;
                case BackgroundMode::gradient: c = lerp(a, b, horizontal ? u : v); break;
                case BackgroundMode::textured: c = lerp(a, b, noise.at(u, v)); break;
            }
            double* p = img.px(y, x);
            p[0] = c.r;
            p[1] = c.g;
            p[2] = c.b;
        }
    return img;
}

struct Lobe {
    double cx, cy, rx, ry;  // ellipse, pixels
};

// compactly supported radial falloff: (1 - r^2)^2 inside r < 1, else 0
double lobe_coverage(const Lobe& lobe, double x, double y) {
    double dx = (x - lobe.cx) / lobe.rx;
    double dy = (y - lobe.cy) / lobe.ry;
    double r2 = dx * dx + dy * dy;
    if (r2 >= 1.0) return 0.0;
    double t = 1.0 - r2;
    return t * t;
}

struct SynthObject {
    Category category;
    BBox box;
    double alpha;
    std::vector<Lobe> lobes;
    Color core, edge;
    ValueNoise texture;
};

SynthObject make_object(Rng& rng, const SynthSpec& spec) {
    double min_dim = std::min(spec.image_w, spec.image_h);
    bool is_fire = rng.bernoulli(0.5);

    double w = rng.uniform(0.18, 0.45) * min_dim;
    double h = is_fire ? rng.uniform(0.18, 0.45) * min_dim
                       : std::min(rng.uniform(1.1, 1.5) * w, 0.55 * min_dim);
    double cx = rng.uniform(w / 2 + 1, spec.image_w - w / 2 - 1);
    double cy = rng.uniform(h / 2 + 1, spec.image_h - h / 2 - 1);

    SynthObject obj{is_fire ? Category::fire : Category::smoke,
                    BBox(cx, cy, w, h),
                    rng.uniform(spec.alpha_lo, spec.alpha_hi),
                    {},
                    {},
                    {},
                    ValueNoise(rng, 4)};

    // the main lobe is inscribed in the box so the painted support fills it
    obj.lobes.push_back({cx, cy, w / 2, h / 2});
    int extra = static_cast<int>(rng.uniform_int(1, 2));
    for (int i = 0; i < extra; ++i) {
        double sx = rng.uniform(0.25, 0.5), sy = rng.uniform(0.25, 0.5);
        double ox = rng.uniform(-0.5 + sx, 0.5 - sx) * w;
        double oy = rng.uniform(-0.5 + sy, 0.5 - sy) * h;
        obj.lobes.push_back({cx + ox, cy + oy, sx * w, sy * h});
    }

    if (is_fire) {
        obj.core = {255.0, rng.uniform(200, 235), rng.uniform(90, 150)};
        obj.edge = {rng.uniform(190, 230), rng.uniform(50, 90), rng.uniform(5, 30)};
    } else {
        double g = rng.uniform(130, 210);
        obj.core = {std::min(255.0, g * 1.12), std::min(255.0, g * 1.12), std::min(255.0, g * 1.15)};
        obj.edge = {g * 0.8, g * 0.8, g * 0.85};
    }
    return obj;
}

void paint_object(FloatImage& img, const SynthObject& obj) {
    int x1 = std::max(0, static_cast<int>(std::floor(obj.box.x1())));
    int y1 = std::max(0, static_cast<int>(std::floor(obj.box.y1())));
    int x2 = std::min(img.w - 1, static_cast<int>(std::ceil(obj.box.x2())));
    int y2 = std::min(img.h - 1, static_cast<int>(std::ceil(obj.box.y2())));
    for (int y = y1; y <= y2; ++y)
        for (int x = x1; x <= x2; ++x) {
            // sample at the pixel center
            double sx = x + 0.5, sy = y + 0.5;
            double coverage = 0.0;
            for (const auto& lobe : obj.lobes)
                coverage = std::max(coverage, lobe_coverage(lobe, sx, sy));
            if (coverage <= 0.0) continue;
            double u = (sx - obj.box.x1()) / obj.box.w;
            double v = (sy - obj.box.y1()) / obj.box.h;
            double tex = 0.75 + 0.25 * obj.texture.at(std::clamp(u, 0.0, 1.0),
                                                      std::clamp(v, 0.0, 1.0));
            double a = obj.alpha * coverage * tex;
            Color col = lerp(obj.edge, obj.core, coverage);
            double* p = img.px(y, x);
            p[0] += a * (col.r - p[0]);
            p[1] += a * (col.g - p[1]);
            p[2] += a * (col.b - p[2]);
        }
}

ImageU8 quantize(const FloatImage& img) {
    ImageU8 out(img.w, img.h, 3);
    for (size_t i = 0; i < img.rgb.size(); ++i)
        out.pixels[i] = static_cast<uint8_t>(std::lround(std::clamp(img.rgb[i], 0.0, 255.0)));
    return out;
}

std::string image_name(const std::string& name, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", index);
    return name + "-" + buf;
}

} // namespace

ImageU8 render_synth_background(const SynthSpec& spec, int index) {
    spec.validate();
    return quantize(render_background(spec, index));
}

Manifest synth_transparent(const SynthSpec& spec, const std::string& out_dir,
                           const std::string& name) {
    spec.validate();
    std::filesystem::create_directories(out_dir);

    Manifest manifest;
    manifest.name = name;
    manifest.base_dir = out_dir;
    for (int i = 0; i < spec.count; ++i) {
        FloatImage img = render_background(spec, i);
        Rng obj_rng(derive_seed(spec.seed, "synth-obj-" + std::to_string(i)));
        int n = static_cast<int>(obj_rng.uniform_int(spec.objects_min, spec.objects_max));

        ImageRecord rec;
        rec.image_id = image_name(name, i);
        rec.path = rec.image_id + ".ppm";
        rec.width = spec.image_w;
        rec.height = spec.image_h;
        for (int k = 0; k < n; ++k) {
            SynthObject obj = make_object(obj_rng, spec);
            paint_object(img, obj);
            LabeledBox ann;
            ann.box = obj.box;
            ann.category = obj.category;
            ann.image_id = rec.image_id;
            rec.annotations.push_back(std::move(ann));
        }
        save_image(quantize(img), (std::filesystem::path(out_dir) / rec.path).string());
        manifest.records.push_back(std::move(rec));
    }
    manifest.validate();
    return manifest;
}

} // namespace fsd
