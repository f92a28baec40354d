#include "copfl/cowa.hpp"

#include <cmath>
#include <string>

#include "copfl/kernels.hpp"

namespace copfl {

namespace {

ParameterVector leave_one_out(const ParameterVector& global, const ParameterVector& own,
                              double alpha_n, const char* what) {
    if (global.size() != own.size()) {
        throw DimensionError(std::string(what) + ": lengths differ");
    }
    if (alpha_n < 0.0) {
        throw std::invalid_argument(std::string(what) + ": alpha must be >= 0");
    }
    if (alpha_n >= kAlphaDegenerate) {
        throw DegenerateLeaveOneOutError(std::string(what) + ": alpha " +
                                         std::to_string(alpha_n) +
                                         " leaves no residual weight (single dominant client)");
    }
    ParameterVector out(global.size());
    kernels::remove_scaled(out.data(), global.data(), own.data(), alpha_n, 1.0 - alpha_n,
                           out.size());
    return out;
}

}  // namespace

ParameterVector leave_one_out_direction(const ParameterVector& delta_global,
                                        const ParameterVector& delta_n, double alpha_n) {
    return leave_one_out(delta_global, delta_n, alpha_n, "leave_one_out_direction");
}

ParameterVector leave_one_out_model(const ParameterVector& w_global, const ParameterVector& w_n,
                                    double alpha_n) {
    return leave_one_out(w_global, w_n, alpha_n, "leave_one_out_model");
}

double gradient_score(const ParameterVector& delta_n, const ParameterVector& delta_loo) {
    const Cosine cos = cosine_similarity(delta_n, delta_loo);
    if (cos.degenerate) {
        return 1.0;
    }
    return 1.0 - cos.value;
}

double prediction_score(const ModelSpec& spec, const ParameterVector& w_loo,
                        const LabeledBatch& client_train) {
    return predict_loss(spec, w_loo, client_train);
}

std::vector<ContributionReport> combine_and_normalize(
    const std::vector<std::pair<double, double>>& grad_data_scores) {
    if (grad_data_scores.empty()) {
        throw std::invalid_argument("combine_and_normalize: empty score list");
    }
    double total = 0.0;
    for (const auto& [grad, data] : grad_data_scores) {
        if (!(grad >= 0.0) || !(data >= 0.0) || !std::isfinite(grad) || !std::isfinite(data)) {
            throw std::invalid_argument(
                "combine_and_normalize: components must be finite and >= 0");
        }
        total += grad + data;
    }

    const std::size_t count = grad_data_scores.size();
    std::vector<ContributionReport> reports(count);
    const bool degenerate_sum = total < 1e-12;
    for (std::size_t i = 0; i < count; ++i) {
        ContributionReport& report = reports[i];
        report.client_id = static_cast<int>(i);
        report.gamma_grad = grad_data_scores[i].first;
        report.gamma_data = grad_data_scores[i].second;
        report.gamma_total = report.gamma_grad + report.gamma_data;
        report.alpha = degenerate_sum ? 1.0 / static_cast<double>(count)
                                      : report.gamma_total / total;
    }
    return reports;
}

}  // namespace copfl
