#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "attention.hpp"
#include "testutil.hpp"

using fsd::AttentionScores;
using fsd::ChannelAttention;
using fsd::Rng;
using fsd::Tensor;
using fsdtest::central_diff;
using fsdtest::random_tensor;
using fsdtest::rel_err;

TEST_CASE("channel_descriptors: constant channel collapses gap and mp") {
    Tensor x(2, 3, 3);
    for (int i = 0; i < 9; ++i) x.channel(0)[i] = 1.5;
    for (int i = 0; i < 9; ++i) x.channel(1)[i] = -0.25;
    std::vector<double> gap, mp;
    fsd::channel_descriptors(x, gap, mp);
    CHECK(gap[0] == doctest::Approx(1.5));
    CHECK(mp[0] == doctest::Approx(1.5));
    CHECK(gap[1] == doctest::Approx(-0.25));
    CHECK(mp[1] == doctest::Approx(-0.25));
}

TEST_CASE("channel_descriptors: worked 1x2 channel") {
    Tensor x(1, 1, 2);
    x.v = {0.0, 4.0};
    std::vector<double> gap, mp;
    fsd::channel_descriptors(x, gap, mp);
    CHECK(gap[0] == doctest::Approx(2.0));
    CHECK(mp[0] == doctest::Approx(4.0));
}

TEST_CASE("channel_descriptors: mp dominates gap elementwise") {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
        Tensor x = random_tensor(rng, 1 + t % 8, 2 + t % 5, 2 + t % 4, -50.0, 50.0);
        std::vector<double> gap, mp;
        fsd::channel_descriptors(x, gap, mp);
        for (size_t c = 0; c < gap.size(); ++c) CHECK(mp[c] >= gap[c]);
    }
}

TEST_CASE("fuse_and_normalize: uniform input gives uniform scores") {
    std::vector<double> gap = {1.0, 1.0, 1.0, 1.0};
    std::vector<double> mp = {2.0, 2.0, 2.0, 2.0};
    auto s = fsd::fuse_and_normalize(gap, mp);
    for (double v : s.scores) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("fuse_and_normalize: closed-form softmax [0, ln 3]") {
    auto s = fsd::fuse_and_normalize({0.0, std::log(3.0)}, {0.0, 0.0});
    CHECK(s.scores[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(s.scores[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("fuse_and_normalize: shift invariance") {
    Rng rng(32);
    std::vector<double> gap(5), mp(5);
    for (auto& v : gap) v = rng.uniform(-3, 3);
    for (auto& v : mp) v = rng.uniform(-3, 3);
    auto base = fsd::fuse_and_normalize(gap, mp);
    auto shifted_gap = gap;
    for (auto& v : shifted_gap) v += 17.5;
    auto shifted = fsd::fuse_and_normalize(shifted_gap, mp);
    for (size_t c = 0; c < 5; ++c)
        CHECK(base.scores[c] == doctest::Approx(shifted.scores[c]).epsilon(1e-12));
}

TEST_CASE("fuse_and_normalize: stable at extreme magnitudes, unit sum") {
    Rng rng(33);
    for (int t = 0; t < 500; ++t) {
        size_t n = 1 + static_cast<size_t>(rng.uniform_int(0, 15));
        std::vector<double> gap(n), mp(n);
        for (auto& v : gap) v = rng.uniform(-1e4, 1e4);
        for (auto& v : mp) v = rng.uniform(-1e4, 1e4);
        auto s = fsd::fuse_and_normalize(gap, mp);
        double sum = std::accumulate(s.scores.begin(), s.scores.end(), 0.0);
        CHECK(std::fabs(sum - 1.0) <= 1e-6);
        for (double v : s.scores) CHECK(v >= 0.0);
        s.validate();  // also asserts positivity; softmax keeps scores > 0
    }
}

TEST_CASE("fuse_and_normalize: length mismatch rejected") {
    CHECK_THROWS_AS(fsd::fuse_and_normalize({1.0, 2.0}, {1.0}), fsd::Error);
}

TEST_CASE("apply_attention: uniform scores with rescale reproduce the input") {
    Rng rng(34);
    Tensor x = random_tensor(rng, 4, 3, 5);
    AttentionScores s{{0.25, 0.25, 0.25, 0.25}};
    Tensor y = fsd::apply_attention(x, s, true);
    for (size_t i = 0; i < x.size(); ++i) CHECK(y.v[i] == doctest::Approx(x.v[i]).epsilon(1e-12));
}

TEST_CASE("apply_attention: elementwise oracle with skewed scores") {
    Rng rng(35);
    Tensor x = random_tensor(rng, 2, 2, 2);
    AttentionScores s{{0.97, 0.03}};
    Tensor y = fsd::apply_attention(x, s, true);
    for (int i = 0; i < 4; ++i) {
        CHECK(y.channel(0)[i] == doctest::Approx(x.channel(0)[i] * 0.97 * 2).epsilon(1e-12));
        CHECK(y.channel(1)[i] == doctest::Approx(x.channel(1)[i] * 0.03 * 2).epsilon(1e-12));
    }
    Tensor zero(3, 2, 2);
    AttentionScores u{{0.5, 0.25, 0.25}};
    Tensor yz = fsd::apply_attention(zero, u, false);
    for (double v : yz.v) CHECK(v == 0.0);
}

TEST_CASE("shortcut_merge: identity, doubling, elementwise oracle") {
    Rng rng(36);
    Tensor x = random_tensor(rng, 3, 4, 4);
    Tensor zero(3, 4, 4);
    Tensor same = fsd::shortcut_merge(x, zero);
    for (size_t i = 0; i < x.size(); ++i) CHECK(same.v[i] == x.v[i]);
    Tensor twice = fsd::shortcut_merge(x, x);
    for (size_t i = 0; i < x.size(); ++i) CHECK(twice.v[i] == doctest::Approx(2 * x.v[i]));
    Tensor y = random_tensor(rng, 3, 4, 4);
    Tensor sum = fsd::shortcut_merge(x, y);
    for (size_t i = 0; i < x.size(); ++i)
        CHECK(sum.v[i] == doctest::Approx(x.v[i] + y.v[i]).epsilon(1e-12));

    Tensor bad(3, 4, 5);
    CHECK_THROWS_AS(fsd::shortcut_merge(x, bad), fsd::Error);
}

TEST_CASE("ChannelAttention: shape preservation across shapes") {
    Rng rng(37);
    for (int t = 0; t < 30; ++t) {
        int c = 1 + t % 8, h = 1 + t % 6, w = 1 + (t * 3) % 6;
        Tensor x = random_tensor(rng, c, h, w);
        ChannelAttention block(true, true);
        Tensor y = block.forward(x);
        CHECK(y.c == c);
        CHECK(y.h == h);
        CHECK(y.w == w);
    }
}

TEST_CASE("ChannelAttention: channel permutation equivariance of scores") {
    Rng rng(38);
    Tensor x = random_tensor(rng, 6, 4, 4);
    ChannelAttention block(true, true);
    block.forward(x);
    auto base = block.last_scores().scores;

    std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    Tensor xp(6, 4, 4);
    for (int c = 0; c < 6; ++c)
        std::copy(x.channel(perm[c]), x.channel(perm[c]) + x.plane(), xp.channel(c));
    block.forward(xp);
    auto permuted = block.last_scores().scores;
    for (int c = 0; c < 6; ++c)
        CHECK(permuted[c] == doctest::Approx(base[perm[c]]).epsilon(1e-12));
}

TEST_CASE("ChannelAttention: gradients match finite differences (enabled and bypassed)") {
    Rng rng(39);
    for (bool enabled : {true, false}) {
        for (int t = 0; t < 10; ++t) {
            int c = 1 + static_cast<int>(rng.uniform_int(0, 7));
            int h = 1 + static_cast<int>(rng.uniform_int(0, 5));
            int w = 1 + static_cast<int>(rng.uniform_int(0, 5));
            Tensor x = random_tensor(rng, c, h, w, -2.0, 2.0);
            ChannelAttention block(enabled, true);

            auto eval = [&]() {
                Rng coeff(77);
                Tensor y = block.forward(x);
                double s = 0.0;
                for (double v : y.v) s += v * coeff.uniform(-1.0, 1.0);
                return s;
            };

            Tensor y = block.forward(x);
            Rng coeff(77);
            Tensor dy = y;
            for (auto& v : dy.v) v = coeff.uniform(-1.0, 1.0);
            Tensor dx = block.backward(dy);

            for (size_t i = 0; i < x.v.size(); ++i) {
                double fd = central_diff(x.v, i, eval);
                CHECK(rel_err(dx.v[i], fd) < 1e-4);
            }
        }
    }
}
