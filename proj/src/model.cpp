#include "copfl/model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "copfl/kernels.hpp"
#include "copfl/rng.hpp"

namespace copfl {

namespace {

void check_batch(const ModelSpec& spec, const LabeledBatch& batch) {
    if (batch.size() == 0) {
        throw std::invalid_argument("batch is empty");
    }
    if (batch.input_dim != spec.input_dim) {
        throw DimensionError("batch input_dim " + std::to_string(batch.input_dim) +
                             " != model input_dim " + std::to_string(spec.input_dim));
    }
    for (int label : batch.labels) {
        if (label < 0 || label >= spec.num_classes) {
            throw std::invalid_argument("label " + std::to_string(label) +
                                        " outside [0, " + std::to_string(spec.num_classes) + ")");
        }
    }
}

void check_params(const ModelSpec& spec, const ParameterVector& params) {
    if (params.size() != spec.param_count()) {
        throw DimensionError("parameter vector length " + std::to_string(params.size()) +
                             " != expected " + std::to_string(spec.param_count()));
    }
}

// Per-sample logits for every kind. hidden_pre is filled for mlp2 only
// (pre-activation values, needed by the backward pass); pass nullptr to skip.
void forward_logits(const ModelSpec& spec, const ParameterVector& params,
                    const LabeledBatch& batch, std::vector<double>& logits,
                    std::vector<double>* hidden_pre) {
    const std::size_t batch_size = batch.size();
    const std::size_t in = static_cast<std::size_t>(spec.input_dim);
    const std::size_t classes = static_cast<std::size_t>(spec.num_classes);
    logits.assign(batch_size * classes, 0.0);

    if (spec.kind == ModelKind::softmax_regression) {
        const double* weight = params.data();          // [C][in]
        const double* bias = params.data() + classes * in;
#pragma omp parallel for schedule(static) if (batch_size > 8)
        for (long long b = 0; b < static_cast<long long>(batch_size); ++b) {
            const double* x = batch.row(static_cast<std::size_t>(b));
            double* z = logits.data() + static_cast<std::size_t>(b) * classes;
            for (std::size_t c = 0; c < classes; ++c) {
                double acc = bias[c];
                const double* w_row = weight + c * in;
                for (std::size_t j = 0; j < in; ++j) acc += w_row[j] * x[j];
                z[c] = acc;
            }
        }
        return;
    }

    const std::size_t hidden = static_cast<std::size_t>(spec.hidden_dim);
    const double* w1 = params.data();                        // [H][in]
    const double* b1 = w1 + hidden * in;                     // [H]
    const double* w2 = b1 + hidden;                          // [C][H]
    const double* b2 = w2 + classes * hidden;                // [C]
    if (hidden_pre) hidden_pre->assign(batch_size * hidden, 0.0);

#pragma omp parallel for schedule(static) if (batch_size > 8)
    for (long long b = 0; b < static_cast<long long>(batch_size); ++b) {
        const double* x = batch.row(static_cast<std::size_t>(b));
        std::vector<double> act(hidden);
        for (std::size_t h = 0; h < hidden; ++h) {
            double acc = b1[h];
            const double* w_row = w1 + h * in;
            for (std::size_t j = 0; j < in; ++j) acc += w_row[j] * x[j];
            if (hidden_pre) (*hidden_pre)[static_cast<std::size_t>(b) * hidden + h] = acc;
            act[h] = acc > 0.0 ? acc : 0.0;
        }
        double* z = logits.data() + static_cast<std::size_t>(b) * classes;
        for (std::size_t c = 0; c < classes; ++c) {
            double acc = b2[c];
            const double* w_row = w2 + c * hidden;
            for (std::size_t h = 0; h < hidden; ++h) acc += w_row[h] * act[h];
            z[c] = acc;
        }
    }
}

// Per-sample cross-entropy and, when probs != nullptr, softmax probabilities.
void softmax_losses(const std::vector<double>& logits, const std::vector<int>& labels,
                    std::size_t classes, std::vector<double>& losses,
                    std::vector<double>* probs) {
    const std::size_t batch_size = labels.size();
    losses.assign(batch_size, 0.0);
#pragma omp parallel for schedule(static) if (batch_size > 8)
    for (long long b = 0; b < static_cast<long long>(batch_size); ++b) {
        const double* z = logits.data() + static_cast<std::size_t>(b) * classes;
        double zmax = z[0];
        for (std::size_t c = 1; c < classes; ++c) {
            if (z[c] > zmax) zmax = z[c];
        }
        double denom = 0.0;
        for (std::size_t c = 0; c < classes; ++c) denom += std::exp(z[c] - zmax);
        const double lse = zmax + std::log(denom);
        losses[static_cast<std::size_t>(b)] = lse - z[labels[static_cast<std::size_t>(b)]];
        if (probs) {
            double* p = probs->data() + static_cast<std::size_t>(b) * classes;
            for (std::size_t c = 0; c < classes; ++c) p[c] = std::exp(z[c] - lse);
        }
    }
}

double mean_loss(const std::vector<double>& losses) {
    return kernels::sum(losses.data(), losses.size()) / static_cast<double>(losses.size());
}

}  // namespace

std::size_t ModelSpec::param_count() const {
    const std::size_t in = static_cast<std::size_t>(input_dim);
    const std::size_t classes = static_cast<std::size_t>(num_classes);
    if (kind == ModelKind::softmax_regression) {
        return (in + 1) * classes;
    }
    const std::size_t hidden = static_cast<std::size_t>(hidden_dim);
    return (in + 1) * hidden + (hidden + 1) * classes;
}

std::pair<std::size_t, std::size_t> ModelSpec::head_range() const {
    if (kind == ModelKind::softmax_regression) {
        return {0, param_count()};
    }
    const std::size_t in = static_cast<std::size_t>(input_dim);
    const std::size_t hidden = static_cast<std::size_t>(hidden_dim);
    return {(in + 1) * hidden, param_count()};
}

ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    rng::Stream stream(rng::derive_key(seed, rng::Domain::init));
    ParameterVector params(spec.param_count(), 0.0);
    const std::size_t in = static_cast<std::size_t>(spec.input_dim);
    const std::size_t classes = static_cast<std::size_t>(spec.num_classes);

    if (spec.kind == ModelKind::softmax_regression) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < classes * in; ++i) {
            params[i] = scale * stream.next_normal();
        }
        return params;  // biases stay zero
    }

    const std::size_t hidden = static_cast<std::size_t>(spec.hidden_dim);
    const double scale1 = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t i = 0; i < hidden * in; ++i) {
        params[i] = scale1 * stream.next_normal();
    }
    const std::size_t w2_begin = hidden * in + hidden;
    const double scale2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (std::size_t i = 0; i < classes * hidden; ++i) {
        params[w2_begin + i] = scale2 * stream.next_normal();
    }
    return params;
}

LossGrad loss_and_grad(const ModelSpec& spec, const ParameterVector& params,
                       const LabeledBatch& batch) {
    check_params(spec, params);
    check_batch(spec, batch);
    const std::size_t batch_size = batch.size();
    const std::size_t in = static_cast<std::size_t>(spec.input_dim);
    const std::size_t classes = static_cast<std::size_t>(spec.num_classes);
    const double inv_b = 1.0 / static_cast<double>(batch_size);

    std::vector<double> logits;
    std::vector<double> hidden_pre;
    std::vector<double> losses;
    std::vector<double> probs(batch_size * classes);
    forward_logits(spec, params, batch, logits,
                   spec.kind == ModelKind::mlp2 ? &hidden_pre : nullptr);
    softmax_losses(logits, batch.labels, classes, losses, &probs);

    const double loss = mean_loss(losses);
    if (!std::isfinite(loss)) {
        throw NumericError("loss is not finite");
    }

    // dlogits = (softmax - onehot) / B, stored in probs.
#pragma omp parallel for schedule(static) if (batch_size > 8)
    for (long long b = 0; b < static_cast<long long>(batch_size); ++b) {
        double* p = probs.data() + static_cast<std::size_t>(b) * classes;
        for (std::size_t c = 0; c < classes; ++c) p[c] *= inv_b;
        p[batch.labels[static_cast<std::size_t>(b)]] -= inv_b;
    }

    LossGrad result;
    result.loss = loss;
    result.grad = ParameterVector(spec.param_count(), 0.0);
    double* grad = result.grad.data();

    if (spec.kind == ModelKind::softmax_regression) {
        double* grad_w = grad;                // [C][in]
        double* grad_b = grad + classes * in; // [C]
#pragma omp parallel for schedule(static) if (classes > 4)
        for (long long c = 0; c < static_cast<long long>(classes); ++c) {
            double* gw_row = grad_w + static_cast<std::size_t>(c) * in;
            double gb = 0.0;
            for (std::size_t b = 0; b < batch_size; ++b) {
                const double dl = probs[b * classes + static_cast<std::size_t>(c)];
                gb += dl;
                const double* x = batch.row(b);
                for (std::size_t j = 0; j < in; ++j) gw_row[j] += dl * x[j];
            }
            grad_b[static_cast<std::size_t>(c)] = gb;
        }
        return result;
    }

    const std::size_t hidden = static_cast<std::size_t>(spec.hidden_dim);
    const double* w2 = params.data() + hidden * in + hidden;  // [C][H]
    double* grad_w1 = grad;                                   // [H][in]
    double* grad_b1 = grad + hidden * in;                     // [H]
    double* grad_w2 = grad_b1 + hidden;                       // [C][H]
    double* grad_b2 = grad_w2 + classes * hidden;             // [C]

    // dpre[b][h]: gradient at the hidden pre-activation, with ReLU'(0) = 0.
    std::vector<double> dpre(batch_size * hidden, 0.0);
#pragma omp parallel for schedule(static) if (batch_size > 8)
    for (long long b = 0; b < static_cast<long long>(batch_size); ++b) {
        const double* p = probs.data() + static_cast<std::size_t>(b) * classes;
        const double* pre = hidden_pre.data() + static_cast<std::size_t>(b) * hidden;
        double* dp = dpre.data() + static_cast<std::size_t>(b) * hidden;
        for (std::size_t h = 0; h < hidden; ++h) {
            if (pre[h] > 0.0) {
                double acc = 0.0;
                for (std::size_t c = 0; c < classes; ++c) acc += w2[c * hidden + h] * p[c];
                dp[h] = acc;
            }
        }
    }

#pragma omp parallel for schedule(static) if (classes > 4)
    for (long long c = 0; c < static_cast<long long>(classes); ++c) {
        double* gw_row = grad_w2 + static_cast<std::size_t>(c) * hidden;
        double gb = 0.0;
        for (std::size_t b = 0; b < batch_size; ++b) {
            const double dl = probs[b * classes + static_cast<std::size_t>(c)];
            gb += dl;
            const double* pre = hidden_pre.data() + b * hidden;
            for (std::size_t h = 0; h < hidden; ++h) {
                const double act = pre[h] > 0.0 ? pre[h] : 0.0;
                gw_row[h] += dl * act;
            }
        }
        grad_b2[static_cast<std::size_t>(c)] = gb;
    }

#pragma omp parallel for schedule(static) if (hidden > 8)
    for (long long h = 0; h < static_cast<long long>(hidden); ++h) {
        double* gw_row = grad_w1 + static_cast<std::size_t>(h) * in;
        double gb = 0.0;
        for (std::size_t b = 0; b < batch_size; ++b) {
            const double dp = dpre[b * hidden + static_cast<std::size_t>(h)];
            if (dp == 0.0) continue;
            gb += dp;
            const double* x = batch.row(b);
            for (std::size_t j = 0; j < in; ++j) gw_row[j] += dp * x[j];
        }
        grad_b1[static_cast<std::size_t>(h)] = gb;
    }
    return result;
}

double predict_loss(const ModelSpec& spec, const ParameterVector& params,
                    const LabeledBatch& batch) {
    check_params(spec, params);
    check_batch(spec, batch);
    std::vector<double> logits;
    std::vector<double> losses;
    forward_logits(spec, params, batch, logits, nullptr);
    softmax_losses(logits, batch.labels, static_cast<std::size_t>(spec.num_classes), losses,
                   nullptr);
    const double loss = mean_loss(losses);
    if (!std::isfinite(loss)) {
        throw NumericError("loss is not finite");
    }
    return loss;
}

double accuracy(const ModelSpec& spec, const ParameterVector& params, const LabeledBatch& batch) {
    check_params(spec, params);
    check_batch(spec, batch);
    const std::size_t classes = static_cast<std::size_t>(spec.num_classes);
    std::vector<double> logits;
    forward_logits(spec, params, batch, logits, nullptr);

    std::size_t correct = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const double* z = logits.data() + b * classes;
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (z[c] > z[best]) best = c;
        }
        if (static_cast<int>(best) == batch.labels[b]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(batch.size());
}

}  // namespace copfl
