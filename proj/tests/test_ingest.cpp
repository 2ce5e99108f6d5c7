#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include "frames.hpp"
#include "letterbox.hpp"
#include "manifest.hpp"
#include "sha256.hpp"
#include "testutil.hpp"

using fsd::BBox;
using fsd::Category;
using fsd::ImageU8;
using fsd::Manifest;
using fsdtest::TempDir;

static fsd::ImageRecord record(const std::string& id, int w, int h,
                               std::vector<fsd::LabeledBox> anns = {}) {
    fsd::ImageRecord rec;
    rec.image_id = id;
    rec.path = id + ".ppm";
    rec.width = w;
    rec.height = h;
    for (auto& a : anns) a.image_id = id;
    rec.annotations = std::move(anns);
    return rec;
}

TEST_CASE("manifest: save/load round trip") {
    TempDir tmp("manifest");
    Manifest m;
    m.name = "toy";
    m.split = fsd::Split::train;
    m.records.push_back(record("a", 64, 48,
                               {{BBox(10, 10, 8, 8), Category::fire, std::nullopt, ""},
                                {BBox(30, 20, 12.5, 10.25), Category::smoke, std::nullopt, ""}}));
    m.records.push_back(record("b", 32, 32));  // negative image
    auto path = tmp.str("toy.manifest");
    fsd::save_manifest(m, path);
    auto loaded = fsd::load_manifest(path);
    CHECK(loaded.name == "toy");
    CHECK(loaded.split == fsd::Split::train);
    REQUIRE(loaded.records.size() == 2);
    CHECK(loaded.records[0].annotations.size() == 2);
    CHECK(loaded.records[0].annotations[1].box.w == doctest::Approx(12.5));
    CHECK(loaded.records[1].annotations.empty());
}

TEST_CASE("manifest: unknown class rejected with its line") {
    TempDir tmp("manifest2");
    auto path = tmp.str("bad.manifest");
    {
        std::ofstream out(path);
        out << "a,a.ppm,64,64,fire,10,10,4,4\n";
        out << "b,b.ppm,64,64,person,10,10,4,4\n";
    }
    try {
        fsd::load_manifest(path);
        FAIL("expected schema error");
    } catch (const fsd::Error& e) {
        CHECK(e.code() == fsd::Errc::schema);
    }
}

TEST_CASE("manifest: duplicate ids rejected") {
    Manifest m;
    m.records.push_back(record("same", 8 * 4, 32));
    m.records.push_back(record("same", 32, 32));
    CHECK_THROWS_AS(m.validate(), fsd::Error);
}

TEST_CASE("manifest: out-of-bounds annotation clipped on load, rejected on save") {
    TempDir tmp("manifest3");
    auto path = tmp.str("clip.manifest");
    {
        std::ofstream out(path);
        out << "a,a.ppm,64,64,fire,60,32,20,10\n";  // spills past x=64
    }
    auto m = fsd::load_manifest(path);
    const auto& box = m.records[0].annotations[0].box;
    CHECK(box.x2() == doctest::Approx(64.0));
    CHECK(box.x1() == doctest::Approx(50.0));
}

TEST_CASE("split_manifest: worked 70/30 splits and determinism") {
    Manifest m;
    for (int i = 0; i < 2500; ++i) m.records.push_back(record("img" + std::to_string(i), 32, 32));
    auto [train, test] = fsd::split_manifest(m, 0.7, 42);
    CHECK(train.records.size() == 1750);
    CHECK(test.records.size() == 750);

    Manifest m3000;
    for (int i = 0; i < 3000; ++i)
        m3000.records.push_back(record("img" + std::to_string(i), 32, 32));
    auto [tr2, te2] = fsd::split_manifest(m3000, 0.7, 42);
    CHECK(tr2.records.size() == 2100);
    CHECK(te2.records.size() == 900);

    Manifest two;
    two.records.push_back(record("a", 32, 32));
    two.records.push_back(record("b", 32, 32));
    auto [tr3, te3] = fsd::split_manifest(two, 0.5, 1);
    CHECK(tr3.records.size() == 1);
    CHECK(te3.records.size() == 1);

    // determinism and disjoint/exhaustive checks
    auto [tr4, te4] = fsd::split_manifest(m, 0.7, 42);
    for (size_t i = 0; i < tr4.records.size(); ++i)
        CHECK(tr4.records[i].image_id == train.records[i].image_id);
    std::set<std::string> ids;
    for (const auto& r : train.records) ids.insert(r.image_id);
    for (const auto& r : test.records) CHECK(ids.insert(r.image_id).second);
    CHECK(ids.size() == 2500);
}

TEST_CASE("split_manifest: fuzzed disjointness and exhaustiveness") {
    fsd::Rng rng(71);
    for (int t = 0; t < 50; ++t) {
        Manifest m;
        int n = static_cast<int>(rng.uniform_int(2, 200));
        for (int i = 0; i < n; ++i) m.records.push_back(record("r" + std::to_string(i), 32, 32));
        double frac = rng.uniform(0.05, 0.95);
        auto [train, test] = fsd::split_manifest(m, frac, rng.next_u64());
        CHECK(train.records.size() + test.records.size() == static_cast<size_t>(n));
        std::set<std::string> seen;
        for (const auto& r : train.records) CHECK(seen.insert(r.image_id).second);
        for (const auto& r : test.records) CHECK(seen.insert(r.image_id).second);
    }
}

TEST_CASE("split_manifest: error paths") {
    Manifest empty;
    CHECK_THROWS_AS(fsd::split_manifest(empty, 0.7, 1), fsd::Error);
    Manifest one;
    one.records.push_back(record("a", 32, 32));
    CHECK_THROWS_AS(fsd::split_manifest(one, 0.0, 1), fsd::Error);
    CHECK_THROWS_AS(fsd::split_manifest(one, 1.0, 1), fsd::Error);
}

TEST_CASE("letterbox: identity on matching size") {
    ImageU8 img(256, 256, 3);
    auto res = fsd::letterbox(img, 256, 256, 32);
    CHECK(res.transform.identity());
    CHECK(res.image.width == 256);
}

TEST_CASE("letterbox: 100x200 -> 256 worked example") {
    // H=100, W=200: scale = min(256/200, 256/100) = 1.28, 64px pad above/below
    ImageU8 img(200, 100, 3);
    auto res = fsd::letterbox(img, 256, 256, 32);
    CHECK(res.transform.scale == doctest::Approx(1.28).epsilon(1e-12));
    CHECK(res.transform.offset_x == doctest::Approx(0.0));
    CHECK(res.transform.offset_y == doctest::Approx(64.0));
    CHECK(res.image.width == 256);
    CHECK(res.image.height == 256);
    // padding is neutral gray
    CHECK(res.image.at(0, 0, 0) == 114);
    CHECK(res.image.at(255, 128, 1) == 114);
}

TEST_CASE("letterbox: box round trip to 1e-9") {
    fsd::Rng rng(72);
    ImageU8 img(77, 131, 3);
    auto res = fsd::letterbox(img, 96, 96, 32);
    for (int i = 0; i < 200; ++i) {
        BBox b = fsdtest::random_box(rng, 30.0);
        BBox fwd = res.transform.apply(b);
        BBox back = res.transform.invert(fwd);
        CHECK(std::fabs(back.cx - b.cx) < 1e-9);
        CHECK(std::fabs(back.cy - b.cy) < 1e-9);
        CHECK(std::fabs(back.w - b.w) < 1e-9);
        CHECK(std::fabs(back.h - b.h) < 1e-9);
    }
}

TEST_CASE("letterbox: rejects targets not divisible by the stride") {
    ImageU8 img(64, 64, 3);
    CHECK_THROWS_AS(fsd::letterbox(img, 250, 250, 32), fsd::Error);
}

static void write_y4m(const std::string& path, int w, int h, int frames, bool c444 = false) {
    std::ofstream out(path, std::ios::binary);
    out << "YUV4MPEG2 W" << w << " H" << h << " F25:1 Ip A1:1 C" << (c444 ? "444" : "420jpeg")
        << "\n";
    int cw = c444 ? w : (w + 1) / 2, ch = c444 ? h : (h + 1) / 2;
    for (int f = 0; f < frames; ++f) {
        out << "FRAME\n";
        for (int i = 0; i < w * h; ++i)
            out.put(static_cast<char>((16 + f * 7 + i) % 220));  // varying luma
        for (int i = 0; i < cw * ch; ++i) out.put(static_cast<char>(128));
        for (int i = 0; i < cw * ch; ++i) out.put(static_cast<char>(128 + f));
    }
}

TEST_CASE("decode_video: y4m stream and frame counts") {
    TempDir tmp("y4m");
    auto path = tmp.str("clip.y4m");
    write_y4m(path, 32, 24, 5);
    auto frames = fsd::decode_video(path);
    REQUIRE(frames.size() == 5);
    CHECK(frames[0].width == 32);
    CHECK(frames[0].height == 24);
    // frames differ (luma ramp shifts per frame)
    CHECK(frames[0].pixels != frames[1].pixels);

    auto path444 = tmp.str("clip444.y4m");
    write_y4m(path444, 16, 16, 2, true);
    CHECK(fsd::decode_video(path444).size() == 2);
}

TEST_CASE("decode_video: frame directory adapter and error paths") {
    TempDir tmp("framedir");
    ImageU8 img(16, 16, 3);
    fsd::save_image(img, tmp.str("b.ppm"));
    fsd::save_image(img, tmp.str("a.ppm"));
    auto frames = fsd::decode_video(tmp.str());
    CHECK(frames.size() == 2);

    CHECK_THROWS_AS(fsd::decode_video(tmp.str("missing.y4m")), fsd::Error);
    std::ofstream(tmp.str("junk.mp4")) << "not a video";
    CHECK_THROWS_AS(fsd::decode_video(tmp.str("junk.mp4")), fsd::Error);
}

TEST_CASE("extract_frames: full budget keeps everything in order") {
    TempDir tmp("extract1");
    auto video = tmp.str("clip.y4m");
    write_y4m(video, 16, 16, 10);
    auto recs = fsd::extract_frames(video, 10, 7, tmp.str("out"));
    REQUIRE(recs.size() == 10);
    for (size_t i = 1; i < recs.size(); ++i) CHECK(recs[i - 1].image_id < recs[i].image_id);
}

TEST_CASE("extract_frames: seeded subsample is deterministic") {
    TempDir tmp("extract2");
    auto video = tmp.str("clip.y4m");
    write_y4m(video, 16, 16, 30);
    auto a = fsd::extract_frames(video, 10, 99, tmp.str("outA"));
    auto b = fsd::extract_frames(video, 10, 99, tmp.str("outB"));
    REQUIRE(a.size() == 10);
    REQUIRE(b.size() == 10);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].image_id == b[i].image_id);
        CHECK(fsd::sha256_file_hex(tmp.str("outA") + "/" + a[i].path) ==
              fsd::sha256_file_hex(tmp.str("outB") + "/" + b[i].path));
    }
    auto c = fsd::extract_frames(video, 10, 100, tmp.str("outC"));
    bool same = true;
    for (size_t i = 0; i < a.size(); ++i) same = same && a[i].image_id == c[i].image_id;
    CHECK_FALSE(same);
}

TEST_CASE("allocate_frame_budget: proportional with exact total") {
    // 23 videos with assorted lengths, budget 3000 -> exactly 3000 kept
    std::vector<size_t> counts;
    fsd::Rng rng(73);
    for (int i = 0; i < 23; ++i) counts.push_back(static_cast<size_t>(rng.uniform_int(80, 400)));
    auto alloc = fsd::allocate_frame_budget(counts, 3000);
    size_t total = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        CHECK(alloc[i] <= counts[i]);
        total += alloc[i];
    }
    CHECK(total == 3000);

    // proportionality within one frame of the ideal share
    size_t grand = 0;
    for (size_t n : counts) grand += n;
    for (size_t i = 0; i < counts.size(); ++i) {
        double ideal = 3000.0 * static_cast<double>(counts[i]) / static_cast<double>(grand);
        CHECK(std::fabs(static_cast<double>(alloc[i]) - ideal) <= 1.0);
    }

    // budget above availability keeps everything
    auto all = fsd::allocate_frame_budget({5, 7}, 100);
    CHECK(all[0] == 5);
    CHECK(all[1] == 7);
}
