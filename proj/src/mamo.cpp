#include "copfl/mamo.hpp"

#include <cmath>

namespace copfl {

MamoState MamoState::make(std::size_t dim, double lr, double beta1, double beta2, double epsilon,
                          bool literal_decay) {
    MamoState state;
    state.u_pers = ParameterVector(dim, 0.0);
    state.v_pers = ParameterVector(dim, 0.0);
    state.u_shared = ParameterVector(dim, 0.0);
    state.v_shared = ParameterVector(dim, 0.0);
    state.lr = lr;
    state.beta1 = beta1;
    state.beta2 = beta2;
    state.epsilon = epsilon;
    state.literal_decay = literal_decay;
    return state;
}

Mask phase_mask(const Mask& m, Phase phase) {
    return phase == Phase::personalized ? m : mask_complement(m);
}

void apply_step(MamoState& state, ParameterVector& params, const ParameterVector& grad,
                const Mask& m, Phase phase) {
    const std::size_t dim = params.size();
    if (grad.size() != dim || m.size() != dim) {
        throw DimensionError("apply_step: params/grad/mask lengths differ");
    }
    if (!all_finite(grad)) {
        throw NumericError("apply_step: non-finite gradient");
    }

    ParameterVector& u = phase == Phase::personalized ? state.u_pers : state.u_shared;
    ParameterVector& v = phase == Phase::personalized ? state.v_pers : state.v_shared;
    long& step = phase == Phase::personalized ? state.step_pers : state.step_shared;
    step += 1;

    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(step));
    const double beta1 = state.beta1;
    const double beta2 = state.beta2;
    const double lr = state.lr;
    const double eps = state.epsilon;
    const bool personalized = phase == Phase::personalized;
    const bool literal_decay = state.literal_decay;

#pragma omp parallel for schedule(static) if (dim > 4096)
    for (long long i = 0; i < static_cast<long long>(dim); ++i) {
        const bool active = personalized ? m[static_cast<std::size_t>(i)] != 0
                                         : m[static_cast<std::size_t>(i)] == 0;
        if (!active && !literal_decay) continue;
        const double q = active ? grad[static_cast<std::size_t>(i)] : 0.0;
        const double ui = beta1 * u[static_cast<std::size_t>(i)] + (1.0 - beta1) * q;
        const double vi = beta2 * v[static_cast<std::size_t>(i)] + (1.0 - beta2) * q * q;
        u[static_cast<std::size_t>(i)] = ui;
        v[static_cast<std::size_t>(i)] = vi;
        if (active) {
            const double u_hat = ui / bc1;
            const double v_hat = vi / bc2;
            params[static_cast<std::size_t>(i)] -= lr * u_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

}  // namespace copfl
