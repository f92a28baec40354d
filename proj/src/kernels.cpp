#include "copfl/kernels.hpp"

#include <cmath>
#include <vector>

namespace copfl::kernels {

namespace {

// Blocked reduction: partials are computed per fixed-size block (parallel)
// and combined serially in block order, so the result does not depend on the
// number of threads.
template <typename BlockFn>
double blocked_reduce(std::size_t n, BlockFn&& block_fn) {
    if (n == 0) return 0.0;
    const std::size_t num_blocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partials(num_blocks, 0.0);
#pragma omp parallel for schedule(static) if (num_blocks > 1)
    for (long long bi = 0; bi < static_cast<long long>(num_blocks); ++bi) {
        const std::size_t begin = static_cast<std::size_t>(bi) * kReductionBlock;
        const std::size_t end = begin + kReductionBlock < n ? begin + kReductionBlock : n;
        partials[static_cast<std::size_t>(bi)] = block_fn(begin, end);
    }
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    return blocked_reduce(n, [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += a[i] * b[i];
        return s;
    });
}

double sum(const double* a, std::size_t n) {
    return blocked_reduce(n, [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += a[i];
        return s;
    });
}

double sum_squares(const double* a, std::size_t n) {
    return blocked_reduce(n, [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += a[i] * a[i];
        return s;
    });
}

void apply_mask(double* out, const double* a, const std::uint8_t* mask, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 4096)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        out[i] = mask[i] ? a[i] : 0.0;
    }
}

void apply_mask_complement(double* out, const double* a, const std::uint8_t* mask, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 4096)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        out[i] = mask[i] ? 0.0 : a[i];
    }
}

void add(double* out, const double* a, const double* b, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 4096)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        out[i] = a[i] + b[i];
    }
}

void sub(double* out, const double* a, const double* b, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 4096)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        out[i] = a[i] - b[i];
    }
}

void diff(double* abs_out, double* signed_out, const double* a, const double* b, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 4096)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const double d = a[i] - b[i];
        signed_out[i] = d;
        abs_out[i] = std::fabs(d);
    }
}

void remove_scaled(double* out, const double* a, const double* b, double scale,
                   double denom, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 4096)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        out[i] = (a[i] - scale * b[i]) / denom;
    }
}

namespace serial {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

double sum_squares(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

void apply_mask(double* out, const double* a, const std::uint8_t* mask, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = mask[i] ? a[i] : 0.0;
}

void apply_mask_complement(double* out, const double* a, const std::uint8_t* mask, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = mask[i] ? 0.0 : a[i];
}

void add(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void diff(double* abs_out, double* signed_out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        signed_out[i] = d;
        abs_out[i] = std::fabs(d);
    }
}

void remove_scaled(double* out, const double* a, const double* b, double scale,
                   double denom, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (a[i] - scale * b[i]) / denom;
}

}  // namespace serial

}  // namespace copfl::kernels
