#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "copfl/model.hpp"
#include "copfl/rng.hpp"

using namespace copfl;

namespace {

LabeledBatch random_batch(const ModelSpec& spec, std::size_t count, std::uint64_t key) {
    rng::Stream stream(key);
    LabeledBatch batch;
    batch.input_dim = spec.input_dim;
    for (std::size_t i = 0; i < count; ++i) {
        for (int j = 0; j < spec.input_dim; ++j) batch.inputs.push_back(stream.next_normal());
        batch.labels.push_back(
            static_cast<int>(stream.next_below(static_cast<std::uint64_t>(spec.num_classes))));
    }
    return batch;
}

ParameterVector random_params(const ModelSpec& spec, std::uint64_t key) {
    rng::Stream stream(key);
    ParameterVector params(spec.param_count());
    for (std::size_t i = 0; i < params.size(); ++i) params[i] = 0.5 * stream.next_normal();
    return params;
}

// Central finite differences over every coordinate: the independent gradient
// oracle the analytic backward pass is checked against.
ParameterVector finite_difference_grad(const ModelSpec& spec, const ParameterVector& params,
                                       const LabeledBatch& batch, double step) {
    ParameterVector grad(params.size());
    ParameterVector probe = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        probe[i] = params[i] + step;
        const double up = predict_loss(spec, probe, batch);
        probe[i] = params[i] - step;
        const double down = predict_loss(spec, probe, batch);
        probe[i] = params[i];
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

double max_rel_error(const ParameterVector& got, const ParameterVector& want) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double scale = std::max({std::fabs(got[i]), std::fabs(want[i]), 1e-7});
        worst = std::max(worst, std::fabs(got[i] - want[i]) / scale);
    }
    return worst;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("parameter counts follow the layout") {
    CHECK(ModelSpec{ModelKind::softmax_regression, 4, 0, 3}.param_count() == 15);
    CHECK(ModelSpec{ModelKind::mlp2, 4, 8, 3}.param_count() == 67);
}

TEST_CASE("init_params is deterministic per seed") {
    const ModelSpec spec{ModelKind::mlp2, 6, 5, 4};
    CHECK(init_params(spec, 3) == init_params(spec, 3));
    CHECK(init_params(spec, 3) != init_params(spec, 4));
    CHECK(init_params(spec, 3).size() == spec.param_count());
}

TEST_CASE("init_params scales weights by fan-in and zeroes biases") {
    const ModelSpec spec{ModelKind::softmax_regression, 100, 0, 50};
    const ParameterVector params = init_params(spec, 11);
    const std::size_t weight_count = 100 * 50;
    double sq = 0.0;
    for (std::size_t i = 0; i < weight_count; ++i) sq += params[i] * params[i];
    const double stddev = std::sqrt(sq / static_cast<double>(weight_count));
    CHECK(stddev == doctest::Approx(1.0 / std::sqrt(100.0)).epsilon(0.05));
    for (std::size_t i = weight_count; i < params.size(); ++i) CHECK(params[i] == 0.0);
}

TEST_CASE("uniform predictor loses ln C") {
    for (const ModelSpec spec : {ModelSpec{ModelKind::softmax_regression, 5, 0, 3},
                                 ModelSpec{ModelKind::mlp2, 5, 4, 7}}) {
        const ParameterVector zeros(spec.param_count(), 0.0);
        const LabeledBatch batch = random_batch(spec, 16, 21);
        const double expected = std::log(static_cast<double>(spec.num_classes));
        CHECK(predict_loss(spec, zeros, batch) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    const ModelSpec specs[] = {ModelSpec{ModelKind::softmax_regression, 3, 0, 3},
                               ModelSpec{ModelKind::mlp2, 3, 4, 3}};
    for (const ModelSpec& spec : specs) {
        for (std::uint64_t draw = 0; draw < 5; ++draw) {
            const ParameterVector params = random_params(spec, 1000 + draw);
            const LabeledBatch batch = random_batch(spec, 6, 2000 + draw);
            const LossGrad lg = loss_and_grad(spec, params, batch);
            const ParameterVector fd = finite_difference_grad(spec, params, batch, 1e-5);
            CHECK(max_rel_error(lg.grad, fd) < 1e-4);
        }
    }
}

TEST_CASE("predict_loss equals the loss_and_grad loss bit for bit") {
    const ModelSpec spec{ModelKind::mlp2, 4, 6, 5};
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const ParameterVector params = random_params(spec, 3000 + trial);
        const LabeledBatch batch = random_batch(spec, 9, 4000 + trial);
        CHECK(loss_and_grad(spec, params, batch).loss == predict_loss(spec, params, batch));
    }
}

TEST_CASE("duplicating the batch leaves loss and gradient unchanged") {
    const ModelSpec spec{ModelKind::mlp2, 4, 6, 3};
    const ParameterVector params = random_params(spec, 5);
    const LabeledBatch batch = random_batch(spec, 7, 6);
    LabeledBatch doubled = batch;
    doubled.inputs.insert(doubled.inputs.end(), batch.inputs.begin(), batch.inputs.end());
    doubled.labels.insert(doubled.labels.end(), batch.labels.begin(), batch.labels.end());

    const LossGrad single = loss_and_grad(spec, params, batch);
    const LossGrad twice = loss_and_grad(spec, params, doubled);
    CHECK(single.loss == doctest::Approx(twice.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < single.grad.size(); ++i) {
        CHECK(single.grad[i] == doctest::Approx(twice.grad[i]).epsilon(1e-9));
    }
}

TEST_CASE("loss is invariant under sample permutation") {
    const ModelSpec spec{ModelKind::softmax_regression, 3, 0, 4};
    const ParameterVector params = random_params(spec, 77);
    const LabeledBatch batch = random_batch(spec, 8, 78);
    LabeledBatch reversed;
    reversed.input_dim = batch.input_dim;
    for (std::size_t i = batch.size(); i-- > 0;) {
        const double* row = batch.row(i);
        reversed.inputs.insert(reversed.inputs.end(), row, row + batch.input_dim);
        reversed.labels.push_back(batch.labels[i]);
    }
    CHECK(predict_loss(spec, params, batch) ==
          doctest::Approx(predict_loss(spec, params, reversed)).epsilon(1e-12));
}

TEST_CASE("argmax ties break to the lowest class") {
    const ModelSpec spec{ModelKind::softmax_regression, 2, 0, 3};
    const ParameterVector zeros(spec.param_count(), 0.0);
    LabeledBatch batch;
    batch.input_dim = 2;
    batch.inputs = {1.0, -1.0, 0.5, 0.5};
    batch.labels = {0, 0};
    CHECK(accuracy(spec, zeros, batch) == 1.0);
}

TEST_CASE("accuracy is exact on a separable construction") {
    // Identity-like weights classify one-hot inputs perfectly.
    const ModelSpec spec{ModelKind::softmax_regression, 3, 0, 3};
    ParameterVector params(spec.param_count(), 0.0);
    for (int c = 0; c < 3; ++c) params[static_cast<std::size_t>(c * 3 + c)] = 5.0;
    LabeledBatch batch;
    batch.input_dim = 3;
    for (int c = 0; c < 3; ++c) {
        for (int j = 0; j < 3; ++j) batch.inputs.push_back(c == j ? 1.0 : 0.0);
        batch.labels.push_back(c);
    }
    CHECK(accuracy(spec, params, batch) == 1.0);
}

TEST_CASE("random predictor on random labels scores near chance") {
    const ModelSpec spec{ModelKind::softmax_regression, 10, 0, 10};
    double mean = 0.0;
    const int trials = 5;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const ParameterVector params = random_params(spec, 9000 + t);
        const LabeledBatch batch = random_batch(spec, 1000, 9100 + t);
        mean += accuracy(spec, params, batch);
    }
    mean /= trials;
    CHECK(mean == doctest::Approx(0.10).epsilon(0.3));
}

TEST_CASE("bias shift leaves accuracy unchanged") {
    const ModelSpec spec{ModelKind::softmax_regression, 4, 0, 5};
    const ParameterVector params = random_params(spec, 31);
    const LabeledBatch batch = random_batch(spec, 64, 32);
    ParameterVector shifted = params;
    const std::size_t bias_begin = static_cast<std::size_t>(4) * 5;
    for (std::size_t i = bias_begin; i < shifted.size(); ++i) shifted[i] += 3.25;
    CHECK(accuracy(spec, params, batch) == accuracy(spec, shifted, batch));
}

TEST_CASE("separable data trains to low loss under plain gradient descent") {
    const ModelSpec spec{ModelKind::softmax_regression, 2, 0, 2};
    LabeledBatch batch;
    batch.input_dim = 2;
    rng::Stream stream(55);
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        const double cx = label == 0 ? -2.0 : 2.0;
        batch.inputs.push_back(cx + 0.1 * stream.next_normal());
        batch.inputs.push_back(cx + 0.1 * stream.next_normal());
        batch.labels.push_back(label);
    }
    ParameterVector params(spec.param_count(), 0.0);
    for (int step = 0; step < 500; ++step) {
        const LossGrad lg = loss_and_grad(spec, params, batch);
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= 0.5 * lg.grad[i];
    }
    CHECK(predict_loss(spec, params, batch) < 0.1);
    CHECK(accuracy(spec, params, batch) == 1.0);
}

TEST_CASE("dimension and label validation") {
    const ModelSpec spec{ModelKind::softmax_regression, 3, 0, 2};
    const LabeledBatch batch = random_batch(spec, 4, 1);
    CHECK_THROWS_AS(predict_loss(spec, ParameterVector(5, 0.0), batch), DimensionError);
    LabeledBatch bad = batch;
    bad.labels[0] = 7;
    const ParameterVector params(spec.param_count(), 0.0);
    CHECK_THROWS_AS(predict_loss(spec, params, bad), std::invalid_argument);
}

TEST_CASE("non-finite parameters surface as NumericError") {
    const ModelSpec spec{ModelKind::mlp2, 3, 4, 3};
    ParameterVector params(spec.param_count(), 0.0);
    // in the output bias: a NaN inside W1 would be masked by the ReLU
    params[params.size() - 1] = std::numeric_limits<double>::quiet_NaN();
    const LabeledBatch batch = random_batch(spec, 4, 2);
    CHECK_THROWS_AS(loss_and_grad(spec, params, batch), NumericError);
    CHECK_THROWS_AS(predict_loss(spec, params, batch), NumericError);
}

TEST_CASE("head range spans the classifier") {
    const ModelSpec softmax{ModelKind::softmax_regression, 4, 0, 3};
    CHECK(softmax.head_range() == std::pair<std::size_t, std::size_t>{0, 15});
    const ModelSpec mlp{ModelKind::mlp2, 4, 8, 3};
    CHECK(mlp.head_range() == std::pair<std::size_t, std::size_t>{40, 67});
}

}  // TEST_SUITE
