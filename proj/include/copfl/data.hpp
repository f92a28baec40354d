#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copfl/model.hpp"

namespace copfl {

// Label-skew partition parameters: each client sees classes_per_client
// classes with a fixed per-class sample bound for train and test.
struct PartitionSpec {
    int num_clients = 1;
    int classes_per_client = 1;
    int train_bound = 1;
    int test_bound = 1;
    int num_classes = 2;
    std::uint64_t seed = 0;
};

struct ClientDataset {
    LabeledBatch train;
    LabeledBatch test;
    std::vector<int> class_set;
};

// Class-bucketed sample pool. samples[c] is row-major, counts[c] x input_dim.
struct Pool {
    int num_classes = 0;
    int input_dim = 0;
    std::vector<std::vector<double>> samples;

    std::size_t class_count(int c) const {
        return samples[static_cast<std::size_t>(c)].size() /
               static_cast<std::size_t>(input_dim);
    }
};

// Gaussian mixture: one mean per class (rejection-sampled so that pairwise
// mean distances stay >= 2 * noise_scale), per-coordinate std = noise_scale.
// mean_scale scales the distribution the means are drawn from. mean_decay
// attenuates mean coordinate j by exp(-mean_decay * j / (input_dim - 1)), so
// class-discriminative signal concentrates in the early input dimensions.
// mean_offset adds one class-independent offset (per-coordinate std
// mean_offset) to every mean; it leaves all pairwise distances unchanged but
// gives the inputs a dominant shared direction.
Pool gen_synthetic(int num_classes, int input_dim, int samples_per_class, std::uint64_t seed,
                   double noise_scale, double mean_scale = 1.0, double mean_decay = 0.0,
                   double mean_offset = 0.0);

// Deals classes to clients by walking a seeded shuffle of the class list
// round-robin, then hands out disjoint sample ranges per (client, class).
// Class sets of different clients may overlap once num_clients *
// classes_per_client exceeds num_classes.
std::vector<ClientDataset> partition(const Pool& pool, const PartitionSpec& spec);

// Adds a per-client offset (scale * standard normal per coordinate) to every
// input of the given client, emulating feature shift between clients.
void apply_feature_shift(ClientDataset& dataset, int client_id, std::uint64_t seed, double scale);

// CSV import: header `label,feat_0,...,feat_{D-1}`, one sample per row.
Pool load_pool_csv(const std::string& path, int num_classes);

}  // namespace copfl
