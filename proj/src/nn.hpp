#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace fsd {

// Named parameter array with its gradient accumulator.
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<double> w;
    std::vector<double> g;

    void resize(std::vector<int> shape_) {
        shape = std::move(shape_);
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        w.assign(n, 0.0);
        g.assign(n, 0.0);
    }
    size_t count() const { return w.size(); }
    void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

// 3x3 (or kxk) convolution, im2col + GEMM. Caches the input column matrix of
// the latest forward for the backward pass; one live forward per instance.
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, bool bias = true);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);
    void collect(std::vector<Param*>& out);
    void set_name(const std::string& prefix);

    // forward multiply-adds for a given input spatial size
    uint64_t mult_adds(int in_h, int in_w) const;

    int in_channels() const { return in_c_; }
    int out_channels() const { return out_c_; }

    Param weight;  // (out, in, k, k)
    Param bias;    // (out), empty when bias is disabled

private:
    int in_c_ = 0, out_c_ = 0, k_ = 3, stride_ = 1, pad_ = 1;
    bool has_bias_ = true;
    int last_h_ = 0, last_w_ = 0, out_h_ = 0, out_w_ = 0;
    std::vector<double> col_;  // (in*k*k, out_h*out_w)
};

// Group normalization with per-channel affine. Group count divides channels.
class GroupNorm {
public:
    GroupNorm() = default;
    GroupNorm(int channels, int groups, double eps = 1e-5);

    // largest divisor of `channels` that is <= 8
    static int default_groups(int channels);

    void init();
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);
    void collect(std::vector<Param*>& out);
    void set_name(const std::string& prefix);

    Param gamma;  // (channels)
    Param beta;   // (channels)

private:
    int channels_ = 0, groups_ = 0;
    double eps_ = 1e-5;
    Tensor xhat_;
    std::vector<double> inv_std_;  // per group
};

class ReLU {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    std::vector<bool> mask_;
};

// Nearest-neighbor 2x upsampling; backward sums the 2x2 fan-out.
Tensor upsample2x_nearest(const Tensor& x);
Tensor upsample2x_nearest_backward(const Tensor& dy, int in_h, int in_w);

inline Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = a;
    for (size_t i = 0; i < out.size(); ++i) out.v[i] += b.v[i];
    return out;
}

inline double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

} // namespace fsd
