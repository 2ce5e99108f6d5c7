#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace fsdtest {

// Relative error with an absolute floor, for comparing analytic gradients
// against finite differences.
inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
}

// Central finite difference of a scalar function w.r.t. one slot of an
// externally owned value vector.
inline double central_diff(std::vector<double>& values, size_t i,
                           const std::function<double()>& eval, double step = 1e-5) {
    double saved = values[i];
    values[i] = saved + step;
    double plus = eval();
    values[i] = saved - step;
    double minus = eval();
    values[i] = saved;
    return (plus - minus) / (2.0 * step);
}

inline fsd::BBox random_box(fsd::Rng& rng, double span = 100.0) {
    double cx = rng.uniform(-span, span);
    double cy = rng.uniform(-span, span);
    double w = rng.uniform(0.1, span);
    double h = rng.uniform(0.1, span);
    return fsd::BBox(cx, cy, w, h);
}

inline fsd::Tensor random_tensor(fsd::Rng& rng, int c, int h, int w, double lo = -1.0,
                                 double hi = 1.0) {
    fsd::Tensor t(c, h, w);
    for (auto& v : t.v) v = rng.uniform(lo, hi);
    return t;
}

// Unique scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            auto candidate = base / (tag + "-" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                break;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& leaf = "") const {
        return leaf.empty() ? path_.string() : (path_ / leaf).string();
    }

private:
    std::filesystem::path path_;
};

} // namespace fsdtest
