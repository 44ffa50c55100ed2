#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gcm/rng.hpp"
#include "gcm/tensor.hpp"

namespace testutil {

inline gcm::Tensor random_tensor(std::vector<std::size_t> shape, gcm::Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
    gcm::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

inline double max_abs(const gcm::Tensor& t) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) m = std::max(m, std::fabs(t[i]));
    return m;
}

// Relative max deviation against a reference tensor.
inline double rel_dev(const gcm::Tensor& got, const gcm::Tensor& want) {
    const double denom = std::max(max_abs(want), 1e-30);
    return gcm::max_abs_diff(got, want) / denom;
}

} // namespace testutil
