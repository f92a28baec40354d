#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "copfl/data.hpp"
#include "copfl/errors.hpp"
#include "copfl/model.hpp"

using namespace copfl;

namespace {

PartitionSpec make_spec(int clients, int classes_per_client, int train_bound, int test_bound,
                        int num_classes, std::uint64_t seed) {
    PartitionSpec spec;
    spec.num_clients = clients;
    spec.classes_per_client = classes_per_client;
    spec.train_bound = train_bound;
    spec.test_bound = test_bound;
    spec.num_classes = num_classes;
    spec.seed = seed;
    return spec;
}

std::string temp_csv_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("gen_synthetic is deterministic per seed") {
    const Pool a = gen_synthetic(4, 6, 20, 9, 0.5);
    const Pool b = gen_synthetic(4, 6, 20, 9, 0.5);
    const Pool c = gen_synthetic(4, 6, 20, 10, 0.5);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
}

TEST_CASE("zero noise collapses every class onto its mean") {
    const Pool pool = gen_synthetic(3, 4, 10, 1, 0.0);
    for (int c = 0; c < 3; ++c) {
        const auto& bucket = pool.samples[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            CHECK(bucket[i] == bucket[i % 4]);
        }
    }
}

TEST_CASE("impossible separation raises GenerationError") {
    // mean_scale 0 puts every mean at the origin; any positive separation
    // requirement is unsatisfiable for the second class.
    CHECK_THROWS_AS(gen_synthetic(2, 3, 5, 1, 1.0, 0.0), GenerationError);
}

TEST_CASE("partition honors counts and class sets") {
    const Pool pool = gen_synthetic(10, 5, 400, 3, 0.5);
    const auto clients = partition(pool, make_spec(10, 2, 50, 100, 10, 3));
    REQUIRE(clients.size() == 10);
    for (const ClientDataset& client : clients) {
        CHECK(client.class_set.size() == 2);
        CHECK(client.train.size() == 100);   // s * train_bound
        CHECK(client.test.size() == 200);    // s * test_bound
        const std::set<int> allowed(client.class_set.begin(), client.class_set.end());
        std::set<int> seen;
        for (int label : client.train.labels) {
            CHECK(allowed.count(label) == 1);
            seen.insert(label);
        }
        CHECK(seen == allowed);  // support is exactly the class set
        for (int label : client.test.labels) CHECK(allowed.count(label) == 1);
    }
}

TEST_CASE("N*s == C assigns every class exactly once") {
    const Pool pool = gen_synthetic(8, 3, 30, 17, 0.5);
    const auto clients = partition(pool, make_spec(4, 2, 5, 5, 8, 17));
    std::set<int> all;
    for (const ClientDataset& client : clients) {
        for (int c : client.class_set) {
            CHECK(all.count(c) == 0);
            all.insert(c);
        }
    }
    CHECK(all.size() == 8);
}

TEST_CASE("round-robin balances class usage within one") {
    const Pool pool = gen_synthetic(10, 3, 500, 23, 0.5);
    const auto clients = partition(pool, make_spec(7, 3, 5, 5, 10, 23));
    std::vector<int> counts(10, 0);
    for (const ClientDataset& client : clients) {
        for (int c : client.class_set) counts[static_cast<std::size_t>(c)]++;
    }
    // 21 picks over 10 classes: every class appears 2 or 3 times.
    for (int count : counts) {
        CHECK(count >= 2);
        CHECK(count <= 3);
    }
}

TEST_CASE("partition is deterministic and disjoint") {
    const Pool pool = gen_synthetic(6, 4, 200, 5, 0.5);
    const PartitionSpec spec = make_spec(5, 2, 10, 10, 6, 5);
    const auto first = partition(pool, spec);
    const auto second = partition(pool, spec);
    for (std::size_t n = 0; n < first.size(); ++n) {
        CHECK(first[n].train.inputs == second[n].train.inputs);
        CHECK(first[n].test.labels == second[n].test.labels);
        CHECK(first[n].class_set == second[n].class_set);
    }

    // Samples are handed out from per-class cursors and never reused: the
    // first feature value identifies a row within its class here.
    std::set<std::pair<int, double>> seen;
    for (const ClientDataset& client : first) {
        for (std::size_t i = 0; i < client.train.size(); ++i) {
            const auto key = std::make_pair(client.train.labels[i], client.train.inputs[i * 4]);
            CHECK(seen.count(key) == 0);
            seen.insert(key);
        }
        for (std::size_t i = 0; i < client.test.size(); ++i) {
            const auto key = std::make_pair(client.test.labels[i], client.test.inputs[i * 4]);
            CHECK(seen.count(key) == 0);
            seen.insert(key);
        }
    }
}

TEST_CASE("capacity shortfall names the class") {
    const Pool pool = gen_synthetic(3, 2, 10, 1, 0.5);
    try {
        partition(pool, make_spec(3, 3, 10, 10, 3, 1));
        FAIL("expected CapacityError");
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("class") != std::string::npos);
    }
}

TEST_CASE("feature shift moves train and test by the same offset") {
    const Pool pool = gen_synthetic(2, 3, 50, 31, 0.1);
    auto clients = partition(pool, make_spec(2, 1, 5, 5, 2, 31));
    ClientDataset before = clients[0];
    apply_feature_shift(clients[0], 0, 31, 1.0);
    const double delta0 = clients[0].train.inputs[0] - before.train.inputs[0];
    CHECK(delta0 != 0.0);
    for (std::size_t i = 0; i < before.train.inputs.size(); ++i) {
        const double delta = clients[0].train.inputs[i] - before.train.inputs[i];
        if (i % 3 == 0) CHECK(delta == doctest::Approx(delta0).epsilon(1e-12));
    }
    const double test_delta = clients[0].test.inputs[0] - before.test.inputs[0];
    CHECK(test_delta == doctest::Approx(delta0).epsilon(1e-12));
}

TEST_CASE("synthetic pool trains to high accuracy") {
    const Pool pool = gen_synthetic(2, 2, 60, 41, 0.1);
    LabeledBatch all;
    all.input_dim = 2;
    for (int c = 0; c < 2; ++c) {
        const auto& bucket = pool.samples[static_cast<std::size_t>(c)];
        all.inputs.insert(all.inputs.end(), bucket.begin(), bucket.end());
        for (std::size_t i = 0; i < 60; ++i) all.labels.push_back(c);
    }
    const ModelSpec spec{ModelKind::softmax_regression, 2, 0, 2};
    ParameterVector params(spec.param_count(), 0.0);
    for (int step = 0; step < 400; ++step) {
        const LossGrad lg = loss_and_grad(spec, params, all);
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= 0.5 * lg.grad[i];
    }
    CHECK(accuracy(spec, params, all) > 0.95);
}

TEST_CASE("csv import round-trips a hand-written pool") {
    const std::string path = temp_csv_path("copfl_pool_ok.csv");
    {
        std::ofstream f(path);
        f << "label,feat_0,feat_1\n";
        f << "0,1.5,-2.0\n";
        f << "1,0.25,0.75\n";
        f << "0,3.0,4.0\n";
    }
    const Pool pool = load_pool_csv(path, 2);
    CHECK(pool.input_dim == 2);
    CHECK(pool.class_count(0) == 2);
    CHECK(pool.class_count(1) == 1);
    CHECK(pool.samples[0][0] == 1.5);
    CHECK(pool.samples[1][1] == 0.75);
    std::remove(path.c_str());
}

TEST_CASE("csv import rejects malformed input") {
    const std::string path = temp_csv_path("copfl_pool_bad.csv");
    {
        std::ofstream f(path);
        f << "label,feature_one\n0,1.0\n";
    }
    CHECK_THROWS(load_pool_csv(path, 2));
    {
        std::ofstream f(path);
        f << "label,feat_0\n5,1.0\n";
    }
    CHECK_THROWS(load_pool_csv(path, 2));  // label out of range
    {
        std::ofstream f(path);
        f << "label,feat_0\n0,abc\n";
    }
    CHECK_THROWS(load_pool_csv(path, 2));  // non-numeric feature
    {
        std::ofstream f(path);
        f << "label,feat_0\n0,1.0,2.0\n";
    }
    CHECK_THROWS(load_pool_csv(path, 2));  // too many fields
    std::remove(path.c_str());
    CHECK_THROWS(load_pool_csv("/nonexistent/nowhere.csv", 2));
}

}  // TEST_SUITE
