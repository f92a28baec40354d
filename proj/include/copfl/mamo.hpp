#pragma once

#include <cstdint>

#include "copfl/param_space.hpp"

namespace copfl {

enum class Phase { personalized, shared };

// Adaptive-momentum state with decoupled buffers for the personalized and the
// shared submodel. Each phase owns its own first/second moment estimates and
// step counter, so the two optimization trajectories never interact.
struct MamoState {
    ParameterVector u_pers, v_pers;
    ParameterVector u_shared, v_shared;
    long step_pers = 0;
    long step_shared = 0;

    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double lr = 0.01;

    // When set, moment buffers at coordinates outside the active phase decay
    // toward zero each step (the update itself stays masked either way). The
    // default keeps them untouched, which makes phase disjointness exact.
    bool literal_decay = false;

    static MamoState make(std::size_t dim, double lr, double beta1, double beta2, double epsilon,
                          bool literal_decay = false);
};

// Coordinate selector for a phase: the mask itself for the personalized
// phase, its complement for the shared phase.
Mask phase_mask(const Mask& m, Phase phase);

// One bias-corrected adaptive step restricted to the phase's coordinates.
// Throws NumericError on a non-finite gradient, leaving params and state
// untouched. The phase's step counter advances exactly once per call.
void apply_step(MamoState& state, ParameterVector& params, const ParameterVector& grad,
                const Mask& m, Phase phase);

}  // namespace copfl
