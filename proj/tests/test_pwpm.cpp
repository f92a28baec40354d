#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "copfl/pwpm.hpp"
#include "copfl/rng.hpp"

using namespace copfl;

namespace {

ParameterVector random_pv(std::size_t n, std::uint64_t key) {
    rng::Stream stream(key);
    ParameterVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = stream.next_normal();
    return v;
}

ParameterVector random_abs(std::size_t n, std::uint64_t key) {
    ParameterVector v = random_pv(n, key);
    for (auto& x : v.values) x = x < 0 ? -x : x;
    return v;
}

}  // namespace

TEST_SUITE("pwpm") {

TEST_CASE("fraction_count floors the scaled fraction") {
    CHECK(fraction_count(0.25, 4) == 1);
    CHECK(fraction_count(0.5, 4) == 2);
    CHECK(fraction_count(0.0, 100) == 0);
    CHECK(fraction_count(1.0, 100) == 100);
    // binary rounding must not lose a unit on decimal fractions
    CHECK(fraction_count(0.3, 10) == 3);
    CHECK(fraction_count(0.15, 1002) == 150);
}

TEST_CASE("param_diff returns absolute and signed deltas") {
    const ParamDiff same = param_diff({1, 2}, {1, 2});
    CHECK(same.abs == ParameterVector{0, 0});
    const ParamDiff mixed = param_diff({1, 0}, {0, 2});
    CHECK(mixed.abs == ParameterVector{1, 2});
    CHECK(mixed.signed_delta == ParameterVector{1, -2});
    CHECK_THROWS_AS(param_diff({1}, {1, 2}), DimensionError);
}

TEST_CASE("param_diff magnitude is symmetric") {
    const ParameterVector a = random_pv(50, 1);
    const ParameterVector b = random_pv(50, 2);
    CHECK(param_diff(a, b).abs == param_diff(b, a).abs);
}

TEST_CASE("update_mask grows by top-p, capped by the budget") {
    const PersonalizationConfig quarter{0.25, 0.5};
    CHECK(update_mask(Mask{0, 0, 0, 0}, {0.1, 0.9, 0.5, 0.2}, quarter) == Mask{0, 1, 0, 0});

    // budget already saturated: no additions
    const PersonalizationConfig half{0.5, 0.5};
    CHECK(update_mask(Mask{0, 1, 0, 1}, {0.9, 0.1, 0.8, 0.1}, half) == Mask{0, 1, 0, 1});

    // p = 0 never changes anything
    const PersonalizationConfig frozen{0.0, 0.5};
    CHECK(update_mask(Mask{0, 1, 0, 0}, {9, 9, 9, 9}, frozen) == Mask{0, 1, 0, 0});
}

TEST_CASE("budget clipping admits candidates by descending magnitude") {
    // p selects 3 candidates {1, 2, 0}, but only one slot remains: index 1
    // (largest delta) must win it.
    const PersonalizationConfig cfg{0.75, 0.5};
    const Mask result = update_mask(Mask{0, 0, 0, 1}, {0.5, 0.9, 0.7, 0.0}, cfg);
    CHECK(result == Mask{0, 1, 0, 1});
}

TEST_CASE("already-set candidates consume no budget") {
    // candidates {0, 1}; 0 already set; room for one more: 1 gets in
    const PersonalizationConfig cfg{0.5, 0.5};
    const Mask result = update_mask(Mask{1, 0, 0, 0}, {0.9, 0.8, 0.1, 0.1}, cfg);
    CHECK(result == Mask{1, 1, 0, 0});
}

TEST_CASE("update_mask properties: budget, monotonicity, determinism, saturation") {
    const std::size_t dim = 97;
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        rng::Stream stream(500 + trial);
        const double p = stream.next_unit();
        const double gamma = stream.next_unit();
        const PersonalizationConfig cfg{p, gamma};
        const std::size_t budget = fraction_count(gamma, dim);

        Mask mask(dim, 0);
        Mask previous = mask;
        for (int round = 0; round < 8; ++round) {
            const ParameterVector delta = random_abs(dim, 1000 * trial + round);
            mask = update_mask(mask, delta, cfg);
            CHECK(mask.popcount() <= budget);
            for (std::size_t i = 0; i < dim; ++i) {
                if (previous[i]) CHECK(mask[i] == 1);  // monotone growth
            }
            CHECK(update_mask(previous, delta, cfg) == mask);  // deterministic
            previous = mask;
        }
        if (mask.popcount() == budget) {
            // saturated masks are fixed points
            const ParameterVector delta = random_abs(dim, 999 + trial);
            CHECK(update_mask(mask, delta, cfg) == mask);
        }
    }
}

TEST_CASE("update_mask rejects an over-budget starting mask") {
    const PersonalizationConfig cfg{0.5, 0.25};
    CHECK_THROWS_AS(update_mask(Mask{1, 1, 1, 0}, {1, 2, 3, 4}, cfg), std::invalid_argument);
}

TEST_CASE("split_model partitions exactly") {
    const SplitModel split = split_model({1, 2, 3}, {0, 1, 0});
    CHECK(split.personalized == ParameterVector{0, 2, 0});
    CHECK(split.shared == ParameterVector{1, 0, 3});

    const SplitModel allshared = split_model({4, 5}, {0, 0});
    CHECK(allshared.personalized == ParameterVector{0, 0});
    CHECK(allshared.shared == ParameterVector{4, 5});

    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const ParameterVector w = random_pv(31, 7000 + trial);
        rng::Stream stream(8000 + trial);
        Mask m(31);
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = static_cast<std::uint8_t>(stream.next_u64() & 1);
        }
        const SplitModel split_random = split_model(w, m);
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(split_random.personalized[i] + split_random.shared[i] == w[i]);
        }
    }
}

}  // TEST_SUITE
