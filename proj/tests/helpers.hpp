#pragma once

// Shared conveniences for the test suites: tensor <-> reference-vector
// conversion and random tensor construction.

#include <vector>

#include "oracles.hpp"
#include "tarseg/rng.hpp"
#include "tarseg/tensor.hpp"

namespace testutil {

inline refimpl::Vec to_vec(const tarseg::Tensor& t) {
    return refimpl::Vec(t.vec().begin(), t.vec().end());
}

inline tarseg::Tensor uniform_tensor(std::vector<int> shape, tarseg::Rng& rng, double lo = 0.0,
                                     double hi = 1.0) {
    tarseg::Tensor t(std::move(shape));
    for (auto& v : t.vec()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

inline tarseg::Tensor normal_tensor(std::vector<int> shape, tarseg::Rng& rng,
                                    double scale = 1.0) {
    tarseg::Tensor t(std::move(shape));
    for (auto& v : t.vec()) v = static_cast<float>(rng.normal() * scale);
    return t;
}

inline double max_abs_diff(const tarseg::Tensor& t, const refimpl::Vec& ref) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(t[i]) - ref[i]));
    return m;
}

inline bool bit_equal(const tarseg::Tensor& a, const tarseg::Tensor& b) {
    if (a.shape() != b.shape()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

}  // namespace testutil
