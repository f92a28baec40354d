#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copfl/data.hpp"
#include "copfl/model.hpp"
#include "copfl/orchestrator.hpp"

namespace copfl {

struct MamoOptions {
    bool literal_decay = false;
};

struct DataOptions {
    std::string source = "synthetic";  // "synthetic" or "csv"
    std::string csv_path;
    int classes_per_client = 2;
    int train_bound = 50;
    int test_bound = 100;
    int samples_per_class = 0;  // 0: derived from the partition demand
    double noise_scale = 1.4;
    double mean_scale = 1.0;
    double mean_decay = 0.0;
    double mean_offset = 0.0;
    bool feature_shift = false;
    double feature_shift_scale = 0.5;
};

// Fully resolved run description. load_config parses strictly (unknown keys
// are rejected with a suggestion), fills defaults and validates ranges;
// serializing and reloading the result reproduces the identical run.
struct ExperimentConfig {
    AlgorithmKind algorithm = AlgorithmKind::co_pfl;
    std::uint64_t seed = 0;
    int rounds = 75;
    int clients = 10;
    int local_iters = 1;
    int batch_size = 32;
    double lr = 0.06;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double p = 0.25;
    double gamma = 0.5;
    int eval_every = 1;
    int ft_steps = 5;
    bool renorm_per_coord = false;
    std::string output_dir;
    CowaOptions cowa;
    MamoOptions mamo;
    ModelSpec model{ModelKind::mlp2, 20, 32, 10};
    DataOptions data;
};

// Parses the file, applies dotted-key overrides ("cowa.use_grad=false"),
// fills defaults, validates. Throws ConfigError naming the offending field.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// Same pipeline from an in-memory JSON document.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides = {});

std::string config_to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);  // fnv1a-64 hex of the dump

// Derived helpers used by the runner.
HyperParams hyper_from_config(const ExperimentConfig& config);
PartitionSpec partition_from_config(const ExperimentConfig& config);
int pool_samples_per_class(const ExperimentConfig& config);

}  // namespace copfl
