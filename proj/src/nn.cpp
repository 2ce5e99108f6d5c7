#include "nn.hpp"

#include <Eigen/Core>

#include <cmath>

namespace fsd {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, bool with_bias)
    : in_c_(in_channels), out_c_(out_channels), k_(kernel), stride_(stride), pad_(pad), has_bias_(with_bias) {
    if (in_channels < 1 || out_channels < 1 || kernel < 1 || stride < 1 || pad < 0)
        raise(Errc::config, "bad conv2d geometry");
    weight.resize({out_c_, in_c_, k_, k_});
    if (has_bias_) bias.resize({out_c_});
}

void Conv2d::set_name(const std::string& prefix) {
    weight.name = prefix + ".w";
    if (has_bias_) bias.name = prefix + ".b";
}

void Conv2d::collect(std::vector<Param*>& out) {
    out.push_back(&weight);
    if (has_bias_) out.push_back(&bias);
}

void Conv2d::init(Rng& rng) {
    double fan_in = static_cast<double>(in_c_) * k_ * k_;
    double stddev = std::sqrt(2.0 / fan_in);
    for (auto& w : weight.w) w = rng.normal(0.0, stddev);
    if (has_bias_) std::fill(bias.w.begin(), bias.w.end(), 0.0);
}

namespace {

void im2col(const Tensor& x, int k, int stride, int pad, int out_h, int out_w, double* col) {
    const int ck2 = x.c * k * k;
    for (int row = 0; row < ck2; ++row) {
        int ci = row / (k * k);
        int ky = (row / k) % k;
        int kx = row % k;
        double* dst = col + static_cast<size_t>(row) * out_h * out_w;
        const double* src = x.channel(ci);
        for (int oy = 0; oy < out_h; ++oy) {
            int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= x.h) {
                std::fill(dst, dst + out_w, 0.0);
                dst += out_w;
                continue;
            }
            for (int ox = 0; ox < out_w; ++ox) {
                int ix = ox * stride + kx - pad;
                *dst++ = (ix < 0 || ix >= x.w) ? 0.0 : src[static_cast<size_t>(iy) * x.w + ix];
            }
        }
    }
}

void col2im(const double* col, int c, int h, int w, int k, int stride, int pad, int out_h,
            int out_w, Tensor& dx) {
    const int ck2 = c * k * k;
    for (int row = 0; row < ck2; ++row) {
        int ci = row / (k * k);
        int ky = (row / k) % k;
        int kx = row % k;
        const double* src = col + static_cast<size_t>(row) * out_h * out_w;
        double* dst = dx.channel(ci);
        for (int oy = 0; oy < out_h; ++oy) {
            int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) {
                src += out_w;
                continue;
            }
            for (int ox = 0; ox < out_w; ++ox) {
                int ix = ox * stride + kx - pad;
                if (ix >= 0 && ix < w) dst[static_cast<size_t>(iy) * w + ix] += src[ox];
            }
            src += out_w;
        }
    }
}

} // namespace

Tensor Conv2d::forward(const Tensor& x) {
    if (x.c != in_c_)
        raise(Errc::config, "conv2d: input has " + std::to_string(x.c) + " channels, expected " +
                                std::to_string(in_c_));
    last_h_ = x.h;
    last_w_ = x.w;
    out_h_ = (x.h + 2 * pad_ - k_) / stride_ + 1;
    out_w_ = (x.w + 2 * pad_ - k_) / stride_ + 1;
    if (out_h_ < 1 || out_w_ < 1) raise(Errc::config, "conv2d: input too small for kernel");

    const int ck2 = in_c_ * k_ * k_;
    const int cols = out_h_ * out_w_;
    col_.resize(static_cast<size_t>(ck2) * cols);
    im2col(x, k_, stride_, pad_, out_h_, out_w_, col_.data());

    Tensor y(out_c_, out_h_, out_w_);
    MapRM ym(y.v.data(), out_c_, cols);
    ConstMapRM wm(weight.w.data(), out_c_, ck2);
    ConstMapRM cm(col_.data(), ck2, cols);
    ym.noalias() = wm * cm;
    if (has_bias_)
        for (int o = 0; o < out_c_; ++o) ym.row(o).array() += bias.w[o];
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    if (dy.c != out_c_ || dy.h != out_h_ || dy.w != out_w_)
        raise(Errc::config, "conv2d backward: gradient shape mismatch");
    const int ck2 = in_c_ * k_ * k_;
    const int cols = out_h_ * out_w_;

    ConstMapRM dym(dy.v.data(), out_c_, cols);
    ConstMapRM cm(col_.data(), ck2, cols);
    MapRM dwm(weight.g.data(), out_c_, ck2);
    dwm.noalias() += dym * cm.transpose();
    if (has_bias_)
        for (int o = 0; o < out_c_; ++o) bias.g[o] += dym.row(o).sum();

    std::vector<double> dcol(static_cast<size_t>(ck2) * cols);
    MapRM dcm(dcol.data(), ck2, cols);
    ConstMapRM wm(weight.w.data(), out_c_, ck2);
    dcm.noalias() = wm.transpose() * dym;

    Tensor dx(in_c_, last_h_, last_w_);
    col2im(dcol.data(), in_c_, last_h_, last_w_, k_, stride_, pad_, out_h_, out_w_, dx);
    return dx;
}

uint64_t Conv2d::mult_adds(int in_h, int in_w) const {
    uint64_t oh = static_cast<uint64_t>((in_h + 2 * pad_ - k_) / stride_ + 1);
    uint64_t ow = static_cast<uint64_t>((in_w + 2 * pad_ - k_) / stride_ + 1);
    return oh * ow * static_cast<uint64_t>(out_c_) * in_c_ * k_ * k_;
}

GroupNorm::GroupNorm(int channels, int groups, double eps)
    : channels_(channels), groups_(groups), eps_(eps) {
    if (groups < 1 || channels % groups != 0)
        raise(Errc::config, "group count must divide channel count");
    gamma.resize({channels});
    beta.resize({channels});
    init();
}

int GroupNorm::default_groups(int channels) {
    for (int g = std::min(8, channels); g > 1; --g)
        if (channels % g == 0) return g;
    return 1;
}

void GroupNorm::init() {
    std::fill(gamma.w.begin(), gamma.w.end(), 1.0);
    std::fill(beta.w.begin(), beta.w.end(), 0.0);
}

void GroupNorm::set_name(const std::string& prefix) {
    gamma.name = prefix + ".gamma";
    beta.name = prefix + ".beta";
}

void GroupNorm::collect(std::vector<Param*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

Tensor GroupNorm::forward(const Tensor& x) {
    if (x.c != channels_) raise(Errc::config, "groupnorm: channel mismatch");
    const int per = channels_ / groups_;
    const size_t plane = x.plane();
    const size_t m = static_cast<size_t>(per) * plane;

    xhat_ = Tensor(x.c, x.h, x.w);
    inv_std_.assign(groups_, 0.0);
    Tensor y(x.c, x.h, x.w);
    for (int g = 0; g < groups_; ++g) {
        const double* base = x.channel(g * per);
        double mean = 0.0;
        for (size_t i = 0; i < m; ++i) mean += base[i];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double d = base[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(m);
        double is = 1.0 / std::sqrt(var + eps_);
        inv_std_[g] = is;
        for (int cc = 0; cc < per; ++cc) {
            int ci = g * per + cc;
            const double* src = x.channel(ci);
            double* xh = xhat_.channel(ci);
            double* dst = y.channel(ci);
            double gm = gamma.w[ci], bt = beta.w[ci];
            for (size_t i = 0; i < plane; ++i) {
                xh[i] = (src[i] - mean) * is;
                dst[i] = gm * xh[i] + bt;
            }
        }
    }
    return y;
}

Tensor GroupNorm::backward(const Tensor& dy) {
    check_same_shape(dy, xhat_, "groupnorm backward");
    const int per = channels_ / groups_;
    const size_t plane = dy.plane();
    const double m = static_cast<double>(per) * plane;

    Tensor dx(dy.c, dy.h, dy.w);
    for (int ci = 0; ci < channels_; ++ci) {
        const double* d = dy.channel(ci);
        const double* xh = xhat_.channel(ci);
        double dg = 0.0, db = 0.0;
        for (size_t i = 0; i < plane; ++i) {
            dg += d[i] * xh[i];
            db += d[i];
        }
        gamma.g[ci] += dg;
        beta.g[ci] += db;
    }
    for (int g = 0; g < groups_; ++g) {
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (int cc = 0; cc < per; ++cc) {
            int ci = g * per + cc;
            const double* d = dy.channel(ci);
            const double* xh = xhat_.channel(ci);
            double gm = gamma.w[ci];
            for (size_t i = 0; i < plane; ++i) {
                double dxh = d[i] * gm;
                sum_dxhat += dxh;
                sum_dxhat_xhat += dxh * xh[i];
            }
        }
        double mean_dxhat = sum_dxhat / m;
        double mean_dxhat_xhat = sum_dxhat_xhat / m;
        for (int cc = 0; cc < per; ++cc) {
            int ci = g * per + cc;
            const double* d = dy.channel(ci);
            const double* xh = xhat_.channel(ci);
            double* dst = dx.channel(ci);
            double gm = gamma.w[ci];
            for (size_t i = 0; i < plane; ++i) {
                double dxh = d[i] * gm;
                dst[i] = inv_std_[g] * (dxh - mean_dxhat - xh[i] * mean_dxhat_xhat);
            }
        }
    }
    return dx;
}

Tensor ReLU::forward(const Tensor& x) {
    mask_.assign(x.size(), false);
    Tensor y = x;
    for (size_t i = 0; i < y.size(); ++i) {
        if (y.v[i] > 0)
            mask_[i] = true;
        else
            y.v[i] = 0.0;
    }
    return y;
}

Tensor ReLU::backward(const Tensor& dy) const {
    Tensor dx = dy;
    for (size_t i = 0; i < dx.size(); ++i)
        if (!mask_[i]) dx.v[i] = 0.0;
    return dx;
}

Tensor upsample2x_nearest(const Tensor& x) {
    Tensor y(x.c, x.h * 2, x.w * 2);
    for (int ci = 0; ci < x.c; ++ci) {
        const double* src = x.channel(ci);
        double* dst = y.channel(ci);
        for (int iy = 0; iy < x.h; ++iy)
            for (int ix = 0; ix < x.w; ++ix) {
                double v = src[static_cast<size_t>(iy) * x.w + ix];
                size_t o = (static_cast<size_t>(2 * iy) * y.w) + 2 * ix;
                dst[o] = v;
                dst[o + 1] = v;
                dst[o + y.w] = v;
                dst[o + y.w + 1] = v;
            }
    }
    return y;
}

Tensor upsample2x_nearest_backward(const Tensor& dy, int in_h, int in_w) {
    if (dy.h != in_h * 2 || dy.w != in_w * 2)
        raise(Errc::config, "upsample backward: shape mismatch");
    Tensor dx(dy.c, in_h, in_w);
    for (int ci = 0; ci < dy.c; ++ci) {
        const double* src = dy.channel(ci);
        double* dst = dx.channel(ci);
        for (int iy = 0; iy < in_h; ++iy)
            for (int ix = 0; ix < in_w; ++ix) {
                size_t o = (static_cast<size_t>(2 * iy) * dy.w) + 2 * ix;
                dst[static_cast<size_t>(iy) * in_w + ix] =
                    src[o] + src[o + 1] + src[o + dy.w] + src[o + dy.w + 1];
            }
    }
    return dx;
}

} // namespace fsd
