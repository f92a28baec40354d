#include "copfl/runner.hpp"

namespace copfl {

Experiment experiment_from_config(const ExperimentConfig& config) {
    Pool pool;
    if (config.data.source == "csv") {
        pool = load_pool_csv(config.data.csv_path, config.model.num_classes);
        if (pool.input_dim != config.model.input_dim) {
            throw ConfigError("csv input_dim " + std::to_string(pool.input_dim) +
                              " != model.input_dim " + std::to_string(config.model.input_dim));
        }
    } else {
        pool = gen_synthetic(config.model.num_classes, config.model.input_dim,
                             pool_samples_per_class(config), config.seed,
                             config.data.noise_scale, config.data.mean_scale,
                             config.data.mean_decay, config.data.mean_offset);
    }

    std::vector<ClientDataset> datasets = partition(pool, partition_from_config(config));
    if (config.data.feature_shift) {
        for (std::size_t n = 0; n < datasets.size(); ++n) {
            apply_feature_shift(datasets[n], static_cast<int>(n), config.seed,
                                config.data.feature_shift_scale);
        }
    }
    return make_experiment(config.model, config.algorithm, hyper_from_config(config),
                           std::move(datasets));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RoundObserver& observer) {
    Experiment experiment = experiment_from_config(config);
    return run_rounds(experiment, config.rounds, config.eval_every, observer);
}

}  // namespace copfl
