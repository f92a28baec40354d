#pragma once

#include "copfl/config.hpp"
#include "copfl/orchestrator.hpp"

namespace copfl {

// Builds the data pool (synthetic or CSV), partitions it, and assembles the
// initial experiment state for the configured algorithm.
Experiment experiment_from_config(const ExperimentConfig& config);

// Full run: build + K rounds with evaluation every eval_every rounds.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const RoundObserver& observer = {});

}  // namespace copfl
