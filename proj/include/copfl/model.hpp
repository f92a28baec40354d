#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "copfl/param_space.hpp"

namespace copfl {

enum class ModelKind { softmax_regression, mlp2 };

// Small classifiers with hand-written gradients. Parameters live flattened in
// a single ParameterVector; the layout per kind is:
//   softmax_regression:  W[C][in] row-major, then b[C]
//   mlp2:                W1[hidden][in], b1[hidden], W2[C][hidden], b2[C]
struct ModelSpec {
    ModelKind kind = ModelKind::softmax_regression;
    int input_dim = 0;
    int hidden_dim = 0;  // mlp2 only
    int num_classes = 0;

    std::size_t param_count() const;
    // Coordinate range [begin, end) of the classifier head. For softmax
    // regression the whole model is the head.
    std::pair<std::size_t, std::size_t> head_range() const;
};

struct LabeledBatch {
    int input_dim = 0;
    std::vector<double> inputs;  // row-major, size() x input_dim
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    const double* row(std::size_t i) const {
        return inputs.data() + i * static_cast<std::size_t>(input_dim);
    }
};

struct LossGrad {
    double loss = 0.0;
    ParameterVector grad;
};

// Zero-mean init with per-layer scale 1/sqrt(fan_in); biases start at zero.
ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Mean cross-entropy over the batch (softmax output, log-sum-exp stabilized)
// and its gradient. Throws NumericError if the loss comes out non-finite.
LossGrad loss_and_grad(const ModelSpec& spec, const ParameterVector& params,
                       const LabeledBatch& batch);

// Loss only. Shares the forward code path with loss_and_grad, so the value is
// bit-identical on identical inputs.
double predict_loss(const ModelSpec& spec, const ParameterVector& params,
                    const LabeledBatch& batch);

// Fraction of argmax-correct predictions; argmax ties go to the lowest class.
double accuracy(const ModelSpec& spec, const ParameterVector& params, const LabeledBatch& batch);

}  // namespace copfl
