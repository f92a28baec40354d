#include "copfl/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "copfl/kernels.hpp"

namespace copfl {

std::size_t Mask::popcount() const {
    std::size_t count = 0;
    for (std::uint8_t b : bits) count += b;
    return count;
}

ParameterVector elementwise_mul(const ParameterVector& a, const Mask& mask) {
    if (a.size() != mask.size()) {
        throw DimensionError("elementwise_mul: vector length " + std::to_string(a.size()) +
                             " != mask length " + std::to_string(mask.size()));
    }
    ParameterVector out(a.size());
    kernels::apply_mask(out.data(), a.data(), mask.data(), a.size());
    return out;
}

ParameterVector elementwise_mul_complement(const ParameterVector& a, const Mask& mask) {
    if (a.size() != mask.size()) {
        throw DimensionError("elementwise_mul_complement: vector length " +
                             std::to_string(a.size()) + " != mask length " +
                             std::to_string(mask.size()));
    }
    ParameterVector out(a.size());
    kernels::apply_mask_complement(out.data(), a.data(), mask.data(), a.size());
    return out;
}

Mask mask_complement(const Mask& m) {
    Mask out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0 : 1;
    return out;
}

Mask mask_union(const std::vector<Mask>& masks) {
    if (masks.empty()) {
        throw std::invalid_argument("mask_union: empty mask list");
    }
    const std::size_t n = masks.front().size();
    for (const Mask& m : masks) {
        if (m.size() != n) {
            throw DimensionError("mask_union: mask lengths differ");
        }
    }
    Mask out(n);
    for (const Mask& m : masks) {
        for (std::size_t i = 0; i < n; ++i) out[i] |= m[i];
    }
    return out;
}

Cosine cosine_similarity(const ParameterVector& a, const ParameterVector& b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine_similarity: lengths differ");
    }
    const double norm_a = std::sqrt(kernels::sum_squares(a.data(), a.size()));
    const double norm_b = std::sqrt(kernels::sum_squares(b.data(), b.size()));
    if (norm_a < kNormEpsilon || norm_b < kNormEpsilon) {
        return {0.0, true};
    }
    const double raw = kernels::dot(a.data(), b.data(), a.size()) / (norm_a * norm_b);
    return {std::clamp(raw, -1.0, 1.0), false};
}

std::vector<std::size_t> top_k_indices(const ParameterVector& magnitudes, std::size_t k) {
    const std::size_t n = magnitudes.size();
    if (k > n) {
        throw std::invalid_argument("top_k_indices: k=" + std::to_string(k) + " exceeds length " +
                                    std::to_string(n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t lhs, std::size_t rhs) {
                          if (magnitudes[lhs] != magnitudes[rhs]) {
                              return magnitudes[lhs] > magnitudes[rhs];
                          }
                          return lhs < rhs;
                      });
    order.resize(k);
    return order;
}

bool all_finite(const ParameterVector& v) {
    for (double x : v.values) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace copfl
