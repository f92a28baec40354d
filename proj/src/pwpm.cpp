#include "copfl/pwpm.hpp"

#include <cmath>
#include <string>

#include "copfl/kernels.hpp"

namespace copfl {

std::size_t fraction_count(double fraction, std::size_t dim) {
    const double scaled = fraction * static_cast<double>(dim) + 1e-9;
    if (scaled <= 0.0) return 0;
    const auto count = static_cast<std::size_t>(scaled);
    return count > dim ? dim : count;
}

ParamDiff param_diff(const ParameterVector& before, const ParameterVector& after) {
    if (before.size() != after.size()) {
        throw DimensionError("param_diff: lengths differ");
    }
    ParamDiff out;
    out.abs = ParameterVector(before.size());
    out.signed_delta = ParameterVector(before.size());
    kernels::diff(out.abs.data(), out.signed_delta.data(), before.data(), after.data(),
                  before.size());
    return out;
}

Mask update_mask(const Mask& m_old, const ParameterVector& delta_abs,
                 const PersonalizationConfig& cfg) {
    const std::size_t dim = m_old.size();
    if (delta_abs.size() != dim) {
        throw DimensionError("update_mask: mask and delta lengths differ");
    }
    const std::size_t budget = fraction_count(cfg.budget, dim);
    const std::size_t occupied = m_old.popcount();
    if (occupied > budget) {
        throw std::invalid_argument("update_mask: mask popcount " + std::to_string(occupied) +
                                    " already exceeds budget " + std::to_string(budget));
    }

    Mask mask = m_old;
    std::size_t room = budget - occupied;
    const std::size_t eligible = fraction_count(cfg.rate, dim);
    // Candidates come back ordered by descending magnitude, so when the
    // budget clips the set, the largest updates win.
    for (std::size_t idx : top_k_indices(delta_abs, eligible)) {
        if (mask[idx]) continue;  // already personalized, consumes no budget
        if (room == 0) break;
        mask[idx] = 1;
        --room;
    }
    return mask;
}

SplitModel split_model(const ParameterVector& w, const Mask& m) {
    if (w.size() != m.size()) {
        throw DimensionError("split_model: lengths differ");
    }
    SplitModel out;
    out.personalized = elementwise_mul(w, m);
    out.shared = elementwise_mul_complement(w, m);
    return out;
}

}  // namespace copfl
