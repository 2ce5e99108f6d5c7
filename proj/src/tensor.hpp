#pragma once

#include <cstddef>
#include <vector>

#include "error.hpp"

namespace fsd {

// Dense (C, H, W) activation grid, double precision, row-major within a channel.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0) {
        if (c_ < 1 || h_ < 1 || w_ < 1) raise(Errc::config, "tensor dims must be >= 1");
    }

    size_t size() const { return v.size(); }
    size_t plane() const { return static_cast<size_t>(h) * w; }

    double& at(int ci, int y, int x) { return v[(static_cast<size_t>(ci) * h + y) * w + x]; }
    double at(int ci, int y, int x) const { return v[(static_cast<size_t>(ci) * h + y) * w + x]; }

    double* channel(int ci) { return v.data() + static_cast<size_t>(ci) * plane(); }
    const double* channel(int ci) const { return v.data() + static_cast<size_t>(ci) * plane(); }

    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

    void fill(double value) { std::fill(v.begin(), v.end(), value); }
    void zero() { fill(0.0); }
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) raise(Errc::config, std::string(what) + ": tensor shape mismatch");
}

} // namespace fsd
