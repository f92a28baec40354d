#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "copfl/cowa.hpp"
#include "copfl/data.hpp"
#include "copfl/mamo.hpp"
#include "copfl/metrics.hpp"
#include "copfl/model.hpp"
#include "copfl/param_space.hpp"
#include "copfl/pwpm.hpp"

namespace copfl {

enum class AlgorithmKind { co_pfl, fedavg, fedavg_ft, local_only, fixed_head };

std::string algorithm_name(AlgorithmKind kind);
std::optional<AlgorithmKind> algorithm_from_name(const std::string& name);

struct CowaOptions {
    bool enabled = true;
    bool use_grad = true;
    bool use_data = true;
    // Min-max normalize each score component across clients before summing
    // (the raw sum mixes a bounded cosine distance with an unbounded loss).
    bool normalize_components = false;
    // Restrict the update direction entering the gradient score to shared
    // coordinates, i.e. mask it by the complement of the client's mask.
    bool shared_only_direction = false;
};

struct HyperParams {
    int local_iters = 1;  // T: steps per phase per round
    int batch_size = 32;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    PersonalizationConfig pers;  // p and gamma
    bool mamo_literal_decay = false;
    // Divide each aggregated coordinate by the total weight of the clients
    // actually sharing it (the plain rule shrinks widely masked coordinates).
    bool renorm_per_coord = false;
    CowaOptions cowa;
    int ft_steps = 5;  // fine-tuning steps for fedavg_ft at evaluation time
    std::uint64_t seed = 0;
};

// Without-replacement minibatch walk over one client's training set; the
// permutation for each epoch is keyed by (seed, client, phase, epoch), so the
// sample sequence is independent of thread scheduling.
struct BatchCursor {
    std::vector<std::uint32_t> order;
    std::size_t pos = 0;
    std::uint64_t epoch = 0;
};

struct ClientState {
    int id = 0;
    ParameterVector model;                  // w_n
    Mask mask;                              // m_n
    MamoState mamo;
    ParameterVector retained_personalized;  // meaningful where mask[i] == 1
    std::shared_ptr<const ClientDataset> data;
    BatchCursor pers_cursor;
    BatchCursor shared_cursor;
};

struct ServerState {
    ParameterVector model;
    std::optional<ParameterVector> prev_model;
    Mask server_mask;
    std::vector<double> weights;  // alphas used in the latest aggregation
    int round = 0;
};

struct Experiment {
    ModelSpec spec;
    AlgorithmKind algo = AlgorithmKind::co_pfl;
    HyperParams hyper;
    std::vector<ClientState> clients;
    ServerState server;
    bool classes_overlap = false;
};

struct ClientRoundOutcome {
    bool ok = false;
    ParameterVector delta;        // round-entry model minus round-exit model
    ParameterVector entry_model;  // reconstituted model the round started from
    std::string error;
};

// One local round: reconstitute the model from broadcast + retained
// personalized coordinates, run T personalized-phase and T shared-phase
// optimizer steps, recombine, grow the mask, update retention. On a numeric
// failure the client state is left untouched and ok is false.
ClientRoundOutcome client_round(ClientState& client, const ParameterVector& broadcast_model,
                                const Mask& broadcast_mask, const ModelSpec& spec,
                                const HyperParams& hyper, AlgorithmKind algo, int round);

// Weighted sum of the clients' shared submodels. Contributions are summed in
// client-id order per coordinate, so the result is schedule-independent.
ParameterVector aggregate_shared(const std::vector<const ParameterVector*>& models,
                                 const std::vector<const Mask*>& masks,
                                 const std::vector<double>& alphas,
                                 bool renorm_per_coord = false);
ParameterVector aggregate_shared(const std::vector<ParameterVector>& models,
                                 const std::vector<Mask>& masks,
                                 const std::vector<double>& alphas,
                                 bool renorm_per_coord = false);

// Folds the aggregate into the server model outside the mask union, keeps the
// old model inside it, advances the round.
void server_update(ServerState& server, const ParameterVector& g_new, const Mask& mask_union);

// Called after every round; record is null on rounds without evaluation.
using RoundObserver = std::function<void(const Experiment&, int round, const RoundRecord*)>;

// Runs one communication round; returns a record when evaluate is set.
std::optional<RoundRecord> run_round(Experiment& experiment, int round, bool evaluate);

struct ExperimentResult {
    std::vector<RoundRecord> records;
    std::vector<ParameterVector> final_models;  // per client
    double wall_ms = 0.0;
    bool classes_overlap = false;
};

Experiment make_experiment(const ModelSpec& spec, AlgorithmKind algo, const HyperParams& hyper,
                           std::vector<ClientDataset> datasets);

ExperimentResult run_rounds(Experiment& experiment, int rounds, int eval_every,
                            const RoundObserver& observer = {});

}  // namespace copfl
