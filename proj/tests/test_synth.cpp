#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "sha256.hpp"
#include "synth.hpp"
#include "testutil.hpp"

using fsd::ImageU8;
using fsd::SynthSpec;
using fsdtest::TempDir;

static SynthSpec base_spec() {
    SynthSpec spec;
    spec.count = 6;
    spec.image_h = 64;
    spec.image_w = 64;
    spec.objects_min = 1;
    spec.objects_max = 2;
    spec.seed = 11;
    return spec;
}

TEST_CASE("synth: manifest shape, files on disk, labels valid") {
    TempDir tmp("synth1");
    auto spec = base_spec();
    auto manifest = fsd::synth_transparent(spec, tmp.str("data"));
    CHECK(manifest.records.size() == 6);
    for (const auto& rec : manifest.records) {
        CHECK(std::filesystem::exists(manifest.resolve_path(rec)));
        CHECK(rec.annotations.size() >= 1);
        CHECK(rec.annotations.size() <= 2);
        auto img = fsd::load_image(manifest.resolve_path(rec));
        CHECK(img.width == 64);
        CHECK(img.height == 64);
    }
}

TEST_CASE("synth: byte-identical across reruns, seed changes pixels") {
    TempDir tmp("synth2");
    auto spec = base_spec();
    auto m1 = fsd::synth_transparent(spec, tmp.str("a"));
    auto m2 = fsd::synth_transparent(spec, tmp.str("b"));
    for (size_t i = 0; i < m1.records.size(); ++i)
        CHECK(fsd::sha256_file_hex(m1.resolve_path(m1.records[i])) ==
              fsd::sha256_file_hex(m2.resolve_path(m2.records[i])));

    spec.seed = 12;
    auto m3 = fsd::synth_transparent(spec, tmp.str("c"));
    bool all_same = true;
    for (size_t i = 0; i < m1.records.size(); ++i)
        all_same = all_same && fsd::sha256_file_hex(m1.resolve_path(m1.records[i])) ==
                                   fsd::sha256_file_hex(m3.resolve_path(m3.records[i]));
    CHECK_FALSE(all_same);
}

// painted pixels = pixels that differ from the background-only render
static void painted_bbox(const ImageU8& composite, const ImageU8& background, int& x1, int& y1,
                         int& x2, int& y2) {
    x1 = composite.width, y1 = composite.height, x2 = -1, y2 = -1;
    for (int y = 0; y < composite.height; ++y)
        for (int x = 0; x < composite.width; ++x)
            for (int c = 0; c < 3; ++c)
                if (composite.at(y, x, c) != background.at(y, x, c)) {
                    x1 = std::min(x1, x);
                    y1 = std::min(y1, y);
                    x2 = std::max(x2, x);
                    y2 = std::max(y2, y);
                    break;
                }
}

TEST_CASE("synth: painted support stays inside the emitted box (1px slack)") {
    TempDir tmp("synth3");
    auto spec = base_spec();
    spec.count = 12;
    spec.objects_min = 1;
    spec.objects_max = 1;  // one object per image isolates its support
    spec.alpha_lo = spec.alpha_hi = 1.0;
    auto manifest = fsd::synth_transparent(spec, tmp.str("data"));
    for (int i = 0; i < spec.count; ++i) {
        auto composite = fsd::load_image(manifest.resolve_path(manifest.records[static_cast<size_t>(i)]));
        auto background = fsd::render_synth_background(spec, i);
        int x1, y1, x2, y2;
        painted_bbox(composite, background, x1, y1, x2, y2);
        REQUIRE(x2 >= 0);  // something was painted
        // tight painted bbox must lie within the gt box dilated by one pixel
        const auto& box = manifest.records[static_cast<size_t>(i)].annotations[0].box;
        CHECK(static_cast<double>(x1) >= box.x1() - 1.0);
        CHECK(static_cast<double>(y1) >= box.y1() - 1.0);
        CHECK(static_cast<double>(x2) + 1.0 <= box.x2() + 1.0);
        CHECK(static_cast<double>(y2) + 1.0 <= box.y2() + 1.0);
    }
}

// mean |composite - background| over each gt box, averaged over the dataset
static double mean_contrast(const fsd::Manifest& manifest, const SynthSpec& spec) {
    double total = 0.0;
    size_t boxes = 0;
    for (size_t i = 0; i < manifest.records.size(); ++i) {
        auto composite = fsd::load_image(manifest.resolve_path(manifest.records[i]));
        auto background = fsd::render_synth_background(spec, static_cast<int>(i));
        for (const auto& ann : manifest.records[i].annotations) {
            double sum = 0.0;
            size_t n = 0;
            int x1 = static_cast<int>(ann.box.x1()), x2 = static_cast<int>(ann.box.x2());
            int y1 = static_cast<int>(ann.box.y1()), y2 = static_cast<int>(ann.box.y2());
            for (int y = std::max(0, y1); y < std::min(composite.height, y2); ++y)
                for (int x = std::max(0, x1); x < std::min(composite.width, x2); ++x) {
                    for (int c = 0; c < 3; ++c)
                        sum += std::fabs(static_cast<double>(composite.at(y, x, c)) -
                                         background.at(y, x, c));
                    ++n;
                }
            if (n) {
                total += sum / (3.0 * static_cast<double>(n));
                ++boxes;
            }
        }
    }
    return boxes ? total / static_cast<double>(boxes) : 0.0;
}

TEST_CASE("synth: low alpha lowers foreground contrast") {
    TempDir tmp("synth4");
    auto opaque = base_spec();
    opaque.count = 10;
    auto lo = opaque;
    lo.alpha_lo = 0.2;
    lo.alpha_hi = 0.4;
    auto m_opaque = fsd::synth_transparent(opaque, tmp.str("opaque"));
    auto m_lo = fsd::synth_transparent(lo, tmp.str("lo"));
    double c_opaque = mean_contrast(m_opaque, opaque);
    double c_lo = mean_contrast(m_lo, lo);
    CHECK(c_lo < c_opaque);
    CHECK(c_lo > 0.0);
}

TEST_CASE("synth: spec validation") {
    SynthSpec bad = base_spec();
    bad.count = 0;
    CHECK_THROWS_AS(bad.validate(), fsd::Error);
    bad = base_spec();
    bad.alpha_lo = 0.0;
    CHECK_THROWS_AS(bad.validate(), fsd::Error);
    bad = base_spec();
    bad.objects_max = 0;
    bad.objects_min = 1;
    CHECK_THROWS_AS(bad.validate(), fsd::Error);
}

TEST_CASE("synth: background modes differ") {
    auto spec = base_spec();
    spec.background = fsd::BackgroundMode::solid;
    auto solid = fsd::render_synth_background(spec, 0);
    // solid background: every pixel equals the first
    for (int y = 0; y < solid.height; ++y)
        for (int c = 0; c < 3; ++c) CHECK(solid.at(y, 17, c) == solid.at(0, 0, c));
    spec.background = fsd::BackgroundMode::textured;
    auto tex = fsd::render_synth_background(spec, 0);
    CHECK(tex.pixels != solid.pixels);
}
