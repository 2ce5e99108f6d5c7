#include "rng.hpp"

#include <algorithm>
#include <numeric>

namespace fsd {

std::vector<size_t> Rng::sample_indices(size_t n, size_t k) {
    if (k >= n) {
        std::vector<size_t> all(n);
        std::iota(all.begin(), all.end(), size_t{0});
        return all;
    }
    // Partial Fisher-Yates over an index table, then sort the prefix.
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    for (size_t i = 0; i < k; ++i) {
        size_t j = static_cast<size_t>(uniform_int(static_cast<int64_t>(i), static_cast<int64_t>(n) - 1));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace fsd
