#include "copfl/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "copfl/errors.hpp"
#include "copfl/rng.hpp"

namespace copfl {

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

Pool gen_synthetic(int num_classes, int input_dim, int samples_per_class, std::uint64_t seed,
                   double noise_scale, double mean_scale, double mean_decay,
                   double mean_offset) {
    if (num_classes < 1 || input_dim < 1 || samples_per_class < 1) {
        throw std::invalid_argument("gen_synthetic: counts must be >= 1");
    }
    if (noise_scale < 0.0 || mean_scale < 0.0 || mean_decay < 0.0 || mean_offset < 0.0) {
        throw std::invalid_argument("gen_synthetic: scales must be >= 0");
    }
    rng::Stream stream(rng::derive_key(seed, rng::Domain::data));
    const std::size_t dim = static_cast<std::size_t>(input_dim);

    std::vector<double> profile(dim, 1.0);
    if (mean_decay > 0.0 && dim > 1) {
        for (std::size_t j = 0; j < dim; ++j) {
            profile[j] = std::exp(-mean_decay * static_cast<double>(j) /
                                  static_cast<double>(dim - 1));
        }
    }

    // A class-independent offset shared by every mean. It cancels out of all
    // pairwise distances but gives the input distribution one dominant
    // direction, the way natural data has dominant features.
    std::vector<double> offset(dim, 0.0);
    if (mean_offset > 0.0) {
        for (double& x : offset) x = mean_offset * stream.next_normal();
    }

    // Class means first, then samples, in class order, so the pool is a pure
    // function of the seed.
    std::vector<std::vector<double>> means;
    means.reserve(static_cast<std::size_t>(num_classes));
    const double min_separation = 2.0 * noise_scale;
    for (int c = 0; c < num_classes; ++c) {
        std::vector<double> candidate(dim);
        bool accepted = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            for (std::size_t j = 0; j < dim; ++j) {
                candidate[j] = offset[j] + mean_scale * profile[j] * stream.next_normal();
            }
            accepted = true;
            for (const auto& prev : means) {
                if (distance(candidate, prev) < min_separation) {
                    accepted = false;
                    break;
                }
            }
            if (accepted) break;
        }
        if (!accepted) {
            throw GenerationError("gen_synthetic: could not separate mean for class " +
                                  std::to_string(c) +
                                  " after 1000 tries; reduce noise_scale");
        }
        means.push_back(candidate);
    }

    Pool pool;
    pool.num_classes = num_classes;
    pool.input_dim = input_dim;
    pool.samples.resize(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
        auto& bucket = pool.samples[static_cast<std::size_t>(c)];
        bucket.resize(static_cast<std::size_t>(samples_per_class) * dim);
        const auto& mean = means[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            bucket[i] = mean[i % dim] + noise_scale * stream.next_normal();
        }
    }
    return pool;
}

std::vector<ClientDataset> partition(const Pool& pool, const PartitionSpec& spec) {
    if (spec.num_clients < 1 || spec.train_bound < 1 || spec.test_bound < 1) {
        throw std::invalid_argument("partition: counts must be >= 1");
    }
    if (spec.classes_per_client < 1 || spec.classes_per_client > spec.num_classes) {
        throw std::invalid_argument("partition: classes_per_client outside [1, num_classes]");
    }
    if (pool.num_classes != spec.num_classes) {
        throw std::invalid_argument("partition: pool has " + std::to_string(pool.num_classes) +
                                    " classes, spec expects " +
                                    std::to_string(spec.num_classes));
    }

    const int num_classes = spec.num_classes;
    std::vector<int> class_order(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) class_order[static_cast<std::size_t>(c)] = c;
    rng::Stream stream(rng::derive_key(spec.seed, rng::Domain::assign));
    stream.shuffle(class_order);

    // Deal classes_per_client consecutive entries of the shuffled list to each
    // client, wrapping around. Every class ends up with floor or ceil of
    // N*s/C assignments.
    std::vector<std::vector<int>> assigned(static_cast<std::size_t>(spec.num_clients));
    std::size_t cursor = 0;
    for (int n = 0; n < spec.num_clients; ++n) {
        for (int j = 0; j < spec.classes_per_client; ++j) {
            assigned[static_cast<std::size_t>(n)].push_back(
                class_order[cursor % static_cast<std::size_t>(num_classes)]);
            ++cursor;
        }
    }

    // Exact capacity check before consuming anything.
    const std::size_t per_assignment =
        static_cast<std::size_t>(spec.train_bound) + static_cast<std::size_t>(spec.test_bound);
    std::vector<std::size_t> demand(static_cast<std::size_t>(num_classes), 0);
    for (const auto& classes : assigned) {
        for (int c : classes) demand[static_cast<std::size_t>(c)] += per_assignment;
    }
    for (int c = 0; c < num_classes; ++c) {
        if (demand[static_cast<std::size_t>(c)] > pool.class_count(c)) {
            throw CapacityError("partition: class " + std::to_string(c) + " needs " +
                                std::to_string(demand[static_cast<std::size_t>(c)]) +
                                " samples but pool holds " +
                                std::to_string(pool.class_count(c)));
        }
    }

    const std::size_t dim = static_cast<std::size_t>(pool.input_dim);
    std::vector<std::size_t> consumed(static_cast<std::size_t>(num_classes), 0);
    std::vector<ClientDataset> clients(static_cast<std::size_t>(spec.num_clients));
    for (int n = 0; n < spec.num_clients; ++n) {
        ClientDataset& client = clients[static_cast<std::size_t>(n)];
        client.class_set = assigned[static_cast<std::size_t>(n)];
        client.train.input_dim = pool.input_dim;
        client.test.input_dim = pool.input_dim;
        for (int c : client.class_set) {
            const auto& bucket = pool.samples[static_cast<std::size_t>(c)];
            std::size_t& used = consumed[static_cast<std::size_t>(c)];
            for (int i = 0; i < spec.train_bound; ++i) {
                const double* sample = bucket.data() + (used + static_cast<std::size_t>(i)) * dim;
                client.train.inputs.insert(client.train.inputs.end(), sample, sample + dim);
                client.train.labels.push_back(c);
            }
            used += static_cast<std::size_t>(spec.train_bound);
            for (int i = 0; i < spec.test_bound; ++i) {
                const double* sample = bucket.data() + (used + static_cast<std::size_t>(i)) * dim;
                client.test.inputs.insert(client.test.inputs.end(), sample, sample + dim);
                client.test.labels.push_back(c);
            }
            used += static_cast<std::size_t>(spec.test_bound);
        }
    }
    return clients;
}

void apply_feature_shift(ClientDataset& dataset, int client_id, std::uint64_t seed, double scale) {
    const std::size_t dim = static_cast<std::size_t>(dataset.train.input_dim);
    rng::Stream stream(rng::derive_key(seed, rng::Domain::shift,
                                       static_cast<std::uint64_t>(client_id)));
    std::vector<double> offset(dim);
    for (double& x : offset) x = scale * stream.next_normal();
    for (std::size_t i = 0; i < dataset.train.inputs.size(); ++i) {
        dataset.train.inputs[i] += offset[i % dim];
    }
    for (std::size_t i = 0; i < dataset.test.inputs.size(); ++i) {
        dataset.test.inputs[i] += offset[i % dim];
    }
}

Pool load_pool_csv(const std::string& path, int num_classes) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open CSV file: " + path);
    }
    std::string header;
    if (!std::getline(file, header)) {
        throw std::runtime_error(path + ": empty file, header required");
    }
    if (!header.empty() && header.back() == '\r') header.pop_back();

    // Header must be exactly label,feat_0,...,feat_{D-1}.
    std::vector<std::string> columns;
    std::stringstream hs(header);
    std::string token;
    while (std::getline(hs, token, ',')) columns.push_back(token);
    if (columns.empty() || columns[0] != "label" || columns.size() < 2) {
        throw std::runtime_error(path + ": header must be label,feat_0,...,feat_{D-1}");
    }
    const int input_dim = static_cast<int>(columns.size()) - 1;
    for (int j = 0; j < input_dim; ++j) {
        const std::string expected = "feat_" + std::to_string(j);
        if (columns[static_cast<std::size_t>(j) + 1] != expected) {
            throw std::runtime_error(path + ": expected column '" + expected + "', found '" +
                                     columns[static_cast<std::size_t>(j) + 1] + "'");
        }
    }

    Pool pool;
    pool.num_classes = num_classes;
    pool.input_dim = input_dim;
    pool.samples.resize(static_cast<std::size_t>(num_classes));

    std::string line;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string field;
        if (!std::getline(ls, field, ',')) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": missing label");
        }
        int label = 0;
        try {
            label = std::stoi(field);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad label '" +
                                     field + "'");
        }
        if (label < 0 || label >= num_classes) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": label " +
                                     std::to_string(label) + " outside [0, " +
                                     std::to_string(num_classes) + ")");
        }
        auto& bucket = pool.samples[static_cast<std::size_t>(label)];
        int count = 0;
        while (std::getline(ls, field, ',')) {
            try {
                bucket.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": bad numeric field '" + field + "'");
            }
            ++count;
        }
        if (count != input_dim) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(input_dim) + " features, found " +
                                     std::to_string(count));
        }
    }
    return pool;
}

}  // namespace copfl
