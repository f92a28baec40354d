#pragma once

#include <cstddef>
#include <cstdint>

namespace copfl::kernels {

// Data-parallel inner loops shared by the vector/mask/optimizer modules.
//
// The production kernels use OpenMP. Two rules keep every result bit-identical
// for any thread count:
//   1. map-style kernels write each output slot with exactly the same
//      arithmetic regardless of which thread owns the slot, and
//   2. reductions accumulate fixed-size blocks into per-block partials and
//      combine the partials serially in block order.
// kernels::serial holds plain reference loops used by the tests and by the
// benchmark; the reference reductions accumulate left to right, so tests
// compare them against the blocked versions with a small tolerance.

inline constexpr std::size_t kReductionBlock = 2048;

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_squares(const double* a, std::size_t n);

// out[i] = a[i] * mask[i]
void apply_mask(double* out, const double* a, const std::uint8_t* mask, std::size_t n);
// out[i] = a[i] * (1 - mask[i])
void apply_mask_complement(double* out, const double* a, const std::uint8_t* mask, std::size_t n);
void add(double* out, const double* a, const double* b, std::size_t n);
void sub(double* out, const double* a, const double* b, std::size_t n);
// abs_out[i] = |a[i] - b[i]|, signed_out[i] = a[i] - b[i]
void diff(double* abs_out, double* signed_out, const double* a, const double* b, std::size_t n);
// out[i] = (a[i] - scale * b[i]) / denom
void remove_scaled(double* out, const double* a, const double* b, double scale,
                   double denom, std::size_t n);

namespace serial {

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_squares(const double* a, std::size_t n);
void apply_mask(double* out, const double* a, const std::uint8_t* mask, std::size_t n);
void apply_mask_complement(double* out, const double* a, const std::uint8_t* mask, std::size_t n);
void add(double* out, const double* a, const double* b, std::size_t n);
void sub(double* out, const double* a, const double* b, std::size_t n);
void diff(double* abs_out, double* signed_out, const double* a, const double* b, std::size_t n);
void remove_scaled(double* out, const double* a, const double* b, double scale,
                   double denom, std::size_t n);

}  // namespace serial

}  // namespace copfl::kernels
