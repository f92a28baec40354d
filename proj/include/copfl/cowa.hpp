#pragma once

#include <vector>

#include "copfl/model.hpp"
#include "copfl/param_space.hpp"

namespace copfl {

// Above this, the leave-one-out denominator 1 - alpha is considered zero.
inline constexpr double kAlphaDegenerate = 1.0 - 1e-6;

// Per-client contribution scores and the resulting aggregation weight.
struct ContributionReport {
    int client_id = 0;
    double gamma_grad = 0.0;   // directional novelty, in [0, 2]
    double gamma_data = 0.0;   // leave-one-out prediction loss, >= 0
    double gamma_total = 0.0;  // gamma_grad + gamma_data
    double alpha = 0.0;        // normalized weight, simplex across the round
};

// (delta_global - alpha_n * delta_n) / (1 - alpha_n): the average update
// direction with client n's weighted contribution removed. Throws
// DegenerateLeaveOneOutError once alpha_n reaches 1 - 1e-6; the caller
// substitutes a neutral score in that case.
ParameterVector leave_one_out_direction(const ParameterVector& delta_global,
                                        const ParameterVector& delta_n, double alpha_n);

// Same algebra applied to models instead of update directions.
ParameterVector leave_one_out_model(const ParameterVector& w_global, const ParameterVector& w_n,
                                    double alpha_n);

// 1 - cos(delta_n, delta_loo). Directionless inputs (near-zero norm) score 1,
// which neither boosts nor suppresses the client.
double gradient_score(const ParameterVector& delta_n, const ParameterVector& delta_loo);

// Loss of the leave-one-out model on the client's own training data. High
// loss means the federation would miss this client's information.
double prediction_score(const ModelSpec& spec, const ParameterVector& w_loo,
                        const LabeledBatch& client_train);

// Sums the two components per client and normalizes onto the simplex. An
// all-zero total falls back to uniform weights.
std::vector<ContributionReport> combine_and_normalize(
    const std::vector<std::pair<double, double>>& grad_data_scores);

}  // namespace copfl
