#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "copfl/errors.hpp"

namespace copfl {

// Flat dense view of every model parameter. All federated mechanics in this
// project are coordinate-wise over vectors of one fixed length d; the layer
// structure only exists inside the model module.
struct ParameterVector {
    std::vector<double> values;

    ParameterVector() = default;
    explicit ParameterVector(std::size_t n, double fill = 0.0) : values(n, fill) {}
    ParameterVector(std::initializer_list<double> init) : values(init) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    double* data() { return values.data(); }
    const double* data() const { return values.data(); }

    bool operator==(const ParameterVector&) const = default;
};

// Binary selector over parameter coordinates; 1 marks a personalized one.
struct Mask {
    std::vector<std::uint8_t> bits;

    Mask() = default;
    explicit Mask(std::size_t n, std::uint8_t fill = 0) : bits(n, fill) {}
    Mask(std::initializer_list<std::uint8_t> init) : bits(init) {}

    std::size_t size() const { return bits.size(); }
    std::uint8_t& operator[](std::size_t i) { return bits[i]; }
    std::uint8_t operator[](std::size_t i) const { return bits[i]; }
    const std::uint8_t* data() const { return bits.data(); }

    std::size_t popcount() const;

    bool operator==(const Mask&) const = default;
};

struct Cosine {
    double value = 0.0;      // clamped to [-1, 1]
    bool degenerate = false; // set when either norm is below epsilon
};

// Norms below this are treated as directionless (degenerate).
inline constexpr double kNormEpsilon = 1e-12;

ParameterVector elementwise_mul(const ParameterVector& a, const Mask& mask);
ParameterVector elementwise_mul_complement(const ParameterVector& a, const Mask& mask);
Mask mask_complement(const Mask& m);
Mask mask_union(const std::vector<Mask>& masks);
Cosine cosine_similarity(const ParameterVector& a, const ParameterVector& b);

// Indices of the k largest entries, ordered by descending value and then by
// ascending index. The ordering matters downstream when a budget truncates
// the candidate list.
std::vector<std::size_t> top_k_indices(const ParameterVector& magnitudes, std::size_t k);

bool all_finite(const ParameterVector& v);

}  // namespace copfl
