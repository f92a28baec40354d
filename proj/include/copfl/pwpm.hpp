#pragma once

#include "copfl/param_space.hpp"

namespace copfl {

// Personalization knobs: p is the fraction of coordinates newly eligible per
// round, gamma caps the personalized fraction overall.
struct PersonalizationConfig {
    double rate = 0.0;    // p in [0, 1]
    double budget = 0.0;  // gamma in [0, 1]
};

struct ParamDiff {
    ParameterVector abs;           // |before - after|
    ParameterVector signed_delta;  // before - after
};

// floor(fraction * dim) with a tiny nudge so decimal fractions like 0.15 of a
// round dimension do not land one below their intended count.
std::size_t fraction_count(double fraction, std::size_t dim);

ParamDiff param_diff(const ParameterVector& before, const ParameterVector& after);

// Grows the mask by the top floor(p*d) coordinates of delta_abs, admitting
// new bits in descending magnitude until the floor(gamma*d) budget is full.
// Existing bits are never cleared.
Mask update_mask(const Mask& m_old, const ParameterVector& delta_abs,
                 const PersonalizationConfig& cfg);

struct SplitModel {
    ParameterVector personalized;  // w restricted to mask-set coordinates
    ParameterVector shared;        // w restricted to the complement
};

// Exact partition: personalized + shared == w coordinate-for-coordinate.
SplitModel split_model(const ParameterVector& w, const Mask& m);

}  // namespace copfl
