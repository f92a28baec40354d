#include "copfl/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "copfl/kernels.hpp"
#include "copfl/rng.hpp"

namespace copfl {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

LabeledBatch next_batch(BatchCursor& cursor, const LabeledBatch& train, int batch_size,
                        std::uint64_t seed, int client_id, Phase phase) {
    const std::size_t total = train.size();
    if (cursor.order.size() != total) {
        cursor.order.resize(total);
        cursor.pos = 0;
        cursor.epoch = 0;
    }
    if (cursor.pos >= total) {
        cursor.pos = 0;
        cursor.epoch += 1;
    }
    if (cursor.pos == 0) {
        for (std::size_t i = 0; i < total; ++i) cursor.order[i] = static_cast<std::uint32_t>(i);
        rng::Stream stream(rng::derive_key(seed, rng::Domain::batch,
                                           static_cast<std::uint64_t>(client_id),
                                           static_cast<std::uint64_t>(phase == Phase::shared),
                                           cursor.epoch));
        stream.shuffle(cursor.order);
    }
    const std::size_t take =
        std::min(static_cast<std::size_t>(batch_size), total - cursor.pos);
    LabeledBatch batch;
    batch.input_dim = train.input_dim;
    batch.inputs.reserve(take * static_cast<std::size_t>(train.input_dim));
    batch.labels.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t src = cursor.order[cursor.pos + i];
        const double* row = train.row(src);
        batch.inputs.insert(batch.inputs.end(), row, row + train.input_dim);
        batch.labels.push_back(train.labels[src]);
    }
    cursor.pos += take;
    return batch;
}

void run_phase(ClientState& client, ParameterVector& work, const ModelSpec& spec,
               const HyperParams& hyper, Phase phase) {
    for (int t = 0; t < hyper.local_iters; ++t) {
        BatchCursor& cursor =
            phase == Phase::personalized ? client.pers_cursor : client.shared_cursor;
        const LabeledBatch batch = next_batch(cursor, client.data->train, hyper.batch_size,
                                              hyper.seed, client.id, phase);
        const LossGrad lg = loss_and_grad(spec, work, batch);
        apply_step(client.mamo, work, lg.grad, client.mask, phase);
    }
}

}  // namespace

std::string algorithm_name(AlgorithmKind kind) {
    switch (kind) {
        case AlgorithmKind::co_pfl: return "co_pfl";
        case AlgorithmKind::fedavg: return "fedavg";
        case AlgorithmKind::fedavg_ft: return "fedavg_ft";
        case AlgorithmKind::local_only: return "local_only";
        case AlgorithmKind::fixed_head: return "fixed_head";
    }
    return "unknown";
}

std::optional<AlgorithmKind> algorithm_from_name(const std::string& name) {
    if (name == "co_pfl") return AlgorithmKind::co_pfl;
    if (name == "fedavg") return AlgorithmKind::fedavg;
    if (name == "fedavg_ft") return AlgorithmKind::fedavg_ft;
    if (name == "local_only") return AlgorithmKind::local_only;
    if (name == "fixed_head") return AlgorithmKind::fixed_head;
    return std::nullopt;
}

ClientRoundOutcome client_round(ClientState& client, const ParameterVector& broadcast_model,
                                const Mask& broadcast_mask, const ModelSpec& spec,
                                const HyperParams& hyper, AlgorithmKind algo, int round) {
    (void)broadcast_mask;  // recorded upstream; local training never consumes it
    (void)round;
    const std::size_t dim = spec.param_count();
    ClientRoundOutcome outcome;

    // Work on a copy; commit only after the whole round succeeded, so a
    // numeric failure leaves the previous state in place.
    ClientState next = client;
    try {
        ParameterVector entry(dim);
        switch (algo) {
            case AlgorithmKind::co_pfl:
            case AlgorithmKind::fixed_head:
                // Shared coordinates come from the broadcast; personalized
                // ones keep the locally retained values.
                for (std::size_t i = 0; i < dim; ++i) {
                    entry[i] = next.mask[i] ? next.retained_personalized[i] : broadcast_model[i];
                }
                break;
            case AlgorithmKind::fedavg:
            case AlgorithmKind::fedavg_ft:
                entry = broadcast_model;
                break;
            case AlgorithmKind::local_only:
                entry = next.model;
                break;
        }

        ParameterVector w_next(dim);
        if (algo == AlgorithmKind::co_pfl || algo == AlgorithmKind::fixed_head) {
            ParameterVector work = entry;
            run_phase(next, work, spec, hyper, Phase::personalized);
            const ParameterVector personalized_part = elementwise_mul(work, next.mask);

            work = entry;
            run_phase(next, work, spec, hyper, Phase::shared);
            const ParameterVector shared_part = elementwise_mul_complement(work, next.mask);

            kernels::add(w_next.data(), shared_part.data(), personalized_part.data(), dim);
        } else {
            // Masks are pinned to zero: the shared phase spans every
            // coordinate and there is nothing to recombine.
            ParameterVector work = entry;
            run_phase(next, work, spec, hyper, Phase::shared);
            w_next = std::move(work);
        }

        ParamDiff diff = param_diff(entry, w_next);
        if (algo == AlgorithmKind::co_pfl) {
            next.mask = update_mask(next.mask, diff.abs, hyper.pers);
        }
        next.retained_personalized = elementwise_mul(w_next, next.mask);
        next.model = std::move(w_next);

        outcome.ok = true;
        outcome.delta = std::move(diff.signed_delta);
        outcome.entry_model = std::move(entry);
        client = std::move(next);
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
    }
    return outcome;
}

ParameterVector aggregate_shared(const std::vector<const ParameterVector*>& models,
                                 const std::vector<const Mask*>& masks,
                                 const std::vector<double>& alphas, bool renorm_per_coord) {
    if (models.empty() || models.size() != masks.size() || models.size() != alphas.size()) {
        throw std::invalid_argument("aggregate_shared: inconsistent argument sizes");
    }
    const std::size_t dim = models.front()->size();
    for (std::size_t n = 0; n < models.size(); ++n) {
        if (models[n]->size() != dim || masks[n]->size() != dim) {
            throw DimensionError("aggregate_shared: lengths differ");
        }
    }
    ParameterVector out(dim, 0.0);
    const long long dim_ll = static_cast<long long>(dim);
#pragma omp parallel for schedule(static) if (dim > 2048)
    for (long long i = 0; i < dim_ll; ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        double acc = 0.0;
        double weight_here = 0.0;
        for (std::size_t n = 0; n < models.size(); ++n) {
            if ((*masks[n])[idx]) continue;
            acc += alphas[n] * (*models[n])[idx];
            weight_here += alphas[n];
        }
        if (renorm_per_coord && weight_here > 0.0) {
            acc /= weight_here;
        }
        out[idx] = acc;
    }
    return out;
}

ParameterVector aggregate_shared(const std::vector<ParameterVector>& models,
                                 const std::vector<Mask>& masks,
                                 const std::vector<double>& alphas, bool renorm_per_coord) {
    std::vector<const ParameterVector*> model_ptrs;
    std::vector<const Mask*> mask_ptrs;
    model_ptrs.reserve(models.size());
    mask_ptrs.reserve(masks.size());
    for (const auto& m : models) model_ptrs.push_back(&m);
    for (const auto& m : masks) mask_ptrs.push_back(&m);
    return aggregate_shared(model_ptrs, mask_ptrs, alphas, renorm_per_coord);
}

void server_update(ServerState& server, const ParameterVector& g_new, const Mask& mask_union) {
    const std::size_t dim = server.model.size();
    if (g_new.size() != dim || mask_union.size() != dim) {
        throw DimensionError("server_update: lengths differ");
    }
    ParameterVector updated(dim);
#pragma omp parallel for schedule(static) if (dim > 4096)
    for (long long i = 0; i < static_cast<long long>(dim); ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        updated[idx] = mask_union[idx] ? server.model[idx] : g_new[idx];
    }
    server.prev_model = std::move(server.model);
    server.model = std::move(updated);
    server.server_mask = mask_union;
    server.round += 1;
}

namespace {

// Contribution scoring for one co_pfl round. Returns per-client
// (gamma_grad, gamma_data) with degenerate or failed clients filled with the
// mean of the healthy ones.
std::vector<std::pair<double, double>> score_contributions(
    const Experiment& ex, const std::vector<ClientRoundOutcome>& outcomes) {
    const std::size_t count = ex.clients.size();
    const CowaOptions& cowa = ex.hyper.cowa;
    std::vector<std::pair<double, double>> scores(count, {0.0, 0.0});
    std::vector<std::uint8_t> valid(count, 0);

    ParameterVector delta_global(ex.server.model.size());
    kernels::sub(delta_global.data(), ex.server.prev_model->data(), ex.server.model.data(),
                 delta_global.size());

    const long long count_ll = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
    for (long long n = 0; n < count_ll; ++n) {
        const std::size_t idx = static_cast<std::size_t>(n);
        const double alpha_prev = ex.server.weights[idx];
        if (!outcomes[idx].ok || alpha_prev >= kAlphaDegenerate) {
            continue;  // neutral fill happens below
        }
        try {
            double grad_component = 0.0;
            double data_component = 0.0;
            if (cowa.use_grad) {
                ParameterVector direction = outcomes[idx].delta;
                if (cowa.shared_only_direction) {
                    direction = elementwise_mul_complement(direction, ex.clients[idx].mask);
                }
                const ParameterVector loo_dir =
                    leave_one_out_direction(delta_global, direction, alpha_prev);
                grad_component = gradient_score(direction, loo_dir);
            }
            if (cowa.use_data) {
                const ParameterVector loo_model =
                    leave_one_out_model(ex.server.model, outcomes[idx].entry_model, alpha_prev);
                data_component =
                    prediction_score(ex.spec, loo_model, ex.clients[idx].data->train);
            }
            scores[idx] = {grad_component, data_component};
            valid[idx] = 1;
        } catch (const std::exception&) {
            // degenerate leave-one-out or numeric trouble: neutral fill below
        }
    }

    double mean_grad = 0.0;
    double mean_data = 0.0;
    std::size_t valid_count = 0;
    for (std::size_t n = 0; n < count; ++n) {
        if (!valid[n]) continue;
        mean_grad += scores[n].first;
        mean_data += scores[n].second;
        ++valid_count;
    }
    if (valid_count > 0) {
        mean_grad /= static_cast<double>(valid_count);
        mean_data /= static_cast<double>(valid_count);
    }
    for (std::size_t n = 0; n < count; ++n) {
        if (!valid[n]) scores[n] = {mean_grad, mean_data};
    }

    if (cowa.normalize_components) {
        const auto minmax_scale = [&scores](double std::pair<double, double>::* member) {
            double lo = scores[0].*member;
            double hi = scores[0].*member;
            for (const auto& entry : scores) {
                lo = std::min(lo, entry.*member);
                hi = std::max(hi, entry.*member);
            }
            const double range = hi - lo;
            for (auto& entry : scores) {
                entry.*member = range < 1e-12 ? 0.0 : (entry.*member - lo) / range;
            }
        };
        minmax_scale(&std::pair<double, double>::first);
        minmax_scale(&std::pair<double, double>::second);
    }
    return scores;
}

ParameterVector evaluation_model(const Experiment& ex, std::size_t client_idx) {
    switch (ex.algo) {
        case AlgorithmKind::co_pfl:
        case AlgorithmKind::fixed_head:
        case AlgorithmKind::local_only:
            return ex.clients[client_idx].model;
        case AlgorithmKind::fedavg:
            return ex.server.model;
        case AlgorithmKind::fedavg_ft: {
            // Evaluation-time fine-tuning: plain full-batch gradient steps on
            // the client's training data, never fed back into training.
            ParameterVector tuned = ex.server.model;
            const LabeledBatch& train = ex.clients[client_idx].data->train;
            for (int step = 0; step < ex.hyper.ft_steps; ++step) {
                const LossGrad lg = loss_and_grad(ex.spec, tuned, train);
                for (std::size_t i = 0; i < tuned.size(); ++i) {
                    tuned[i] -= ex.hyper.lr * lg.grad[i];
                }
            }
            return tuned;
        }
    }
    return ex.server.model;
}

}  // namespace

std::optional<RoundRecord> run_round(Experiment& ex, int round, bool evaluate) {
    const auto start = Clock::now();
    const std::size_t count = ex.clients.size();
    const ParameterVector broadcast = ex.server.model;
    const Mask broadcast_mask = ex.server.server_mask;

    std::vector<ClientRoundOutcome> outcomes(count);
    const long long count_ll = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
    for (long long n = 0; n < count_ll; ++n) {
        const std::size_t idx = static_cast<std::size_t>(n);
        outcomes[idx] = client_round(ex.clients[idx], broadcast, broadcast_mask, ex.spec,
                                     ex.hyper, ex.algo, round);
    }
    for (std::size_t n = 0; n < count; ++n) {
        if (!outcomes[n].ok) {
            std::fprintf(stderr, "round %d: client %d aborted (%s); continuing without it\n",
                         round, ex.clients[n].id, outcomes[n].error.c_str());
        }
    }

    std::vector<Mask> masks;
    masks.reserve(count);
    for (const ClientState& client : ex.clients) masks.push_back(client.mask);
    const Mask united = mask_union(masks);

    // Aggregation weights for this round.
    const bool scored = ex.algo == AlgorithmKind::co_pfl && ex.hyper.cowa.enabled &&
                        ex.server.prev_model.has_value();
    std::vector<double> alphas(count, 1.0 / static_cast<double>(count));
    std::vector<std::pair<double, double>> scores(count, {0.0, 0.0});
    if (scored) {
        scores = score_contributions(ex, outcomes);
        const std::vector<ContributionReport> reports = combine_and_normalize(scores);
        for (std::size_t n = 0; n < count; ++n) alphas[n] = reports[n].alpha;
    }

    // Failed clients drop out of the aggregation; survivors are renormalized.
    // With no survivors the round is a no-op and the uniform weights stand.
    std::size_t survivors = 0;
    for (std::size_t n = 0; n < count; ++n) {
        if (outcomes[n].ok) ++survivors;
    }
    if (survivors > 0 && survivors < count) {
        double surviving_weight = 0.0;
        for (std::size_t n = 0; n < count; ++n) {
            if (outcomes[n].ok) {
                surviving_weight += alphas[n];
            } else {
                alphas[n] = 0.0;
            }
        }
        for (std::size_t n = 0; n < count; ++n) {
            alphas[n] = surviving_weight > 0.0
                            ? alphas[n] / surviving_weight
                            : (outcomes[n].ok ? 1.0 / static_cast<double>(survivors) : 0.0);
        }
    }

    if (ex.algo != AlgorithmKind::local_only && survivors > 0) {
        std::vector<const ParameterVector*> model_ptrs;
        std::vector<const Mask*> mask_ptrs;
        std::vector<double> agg_weights;
        model_ptrs.reserve(count);
        mask_ptrs.reserve(count);
        agg_weights.reserve(count);
        for (std::size_t n = 0; n < count; ++n) {
            model_ptrs.push_back(&ex.clients[n].model);
            mask_ptrs.push_back(&ex.clients[n].mask);
            agg_weights.push_back(alphas[n]);
        }
        const ParameterVector aggregate =
            aggregate_shared(model_ptrs, mask_ptrs, agg_weights, ex.hyper.renorm_per_coord);
        server_update(ex.server, aggregate, united);
    } else {
        ex.server.round += 1;
    }
    ex.server.weights = alphas;

    if (!evaluate) {
        return std::nullopt;
    }

    RoundRecord record;
    record.round = round;
    record.clients.resize(count);
#pragma omp parallel for schedule(dynamic)
    for (long long n = 0; n < count_ll; ++n) {
        const std::size_t idx = static_cast<std::size_t>(n);
        ClientRoundMetrics& m = record.clients[idx];
        m.client_id = ex.clients[idx].id;
        try {
            const ParameterVector model = evaluation_model(ex, idx);
            m.test_acc = accuracy(ex.spec, model, ex.clients[idx].data->test);
            m.train_loss = predict_loss(ex.spec, model, ex.clients[idx].data->train);
        } catch (const std::exception&) {
            m.test_acc = 0.0;
            m.train_loss = std::numeric_limits<double>::infinity();
        }
        m.alpha = alphas[idx];
        m.gamma_grad = scores[idx].first;
        m.gamma_data = scores[idx].second;
        m.mask_popcount = ex.clients[idx].mask.popcount();
    }
    double mean = 0.0;
    for (const auto& c : record.clients) mean += c.test_acc;
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (const auto& c : record.clients) {
        const double d = c.test_acc - mean;
        var += d * d;
    }
    record.mean_acc = mean;
    record.std_acc = std::sqrt(var / static_cast<double>(count));
    record.wall_ms = ms_since(start);
    return record;
}

Experiment make_experiment(const ModelSpec& spec, AlgorithmKind algo, const HyperParams& hyper,
                           std::vector<ClientDataset> datasets) {
    Experiment ex;
    ex.spec = spec;
    ex.algo = algo;
    ex.hyper = hyper;
    const std::size_t dim = spec.param_count();
    const std::size_t count = datasets.size();

    ex.server.model = init_params(spec, hyper.seed);
    ex.server.server_mask = Mask(dim, 0);
    ex.server.weights.assign(count, 1.0 / static_cast<double>(count));
    ex.server.round = 0;

    // Clients with the same class set means overlapping shards; recorded in
    // run metadata because it changes how much redundancy COWA can find.
    std::vector<std::vector<int>> class_sets;
    ex.clients.resize(count);
    for (std::size_t n = 0; n < count; ++n) {
        ClientState& client = ex.clients[n];
        client.id = static_cast<int>(n);
        client.model = ex.server.model;
        client.mask = Mask(dim, 0);
        if (algo == AlgorithmKind::fixed_head) {
            const auto [head_begin, head_end] = spec.head_range();
            for (std::size_t i = head_begin; i < head_end; ++i) client.mask[i] = 1;
        }
        client.mamo = MamoState::make(dim, hyper.lr, hyper.beta1, hyper.beta2, hyper.epsilon,
                                      hyper.mamo_literal_decay);
        client.retained_personalized = elementwise_mul(client.model, client.mask);
        class_sets.push_back(datasets[n].class_set);
        client.data = std::make_shared<const ClientDataset>(std::move(datasets[n]));
    }
    for (std::size_t a = 0; a < class_sets.size() && !ex.classes_overlap; ++a) {
        for (std::size_t b = a + 1; b < class_sets.size() && !ex.classes_overlap; ++b) {
            for (int c : class_sets[a]) {
                for (int d : class_sets[b]) {
                    if (c == d) {
                        ex.classes_overlap = true;
                        break;
                    }
                }
                if (ex.classes_overlap) break;
            }
        }
    }
    if (algo == AlgorithmKind::fixed_head && count > 0) {
        std::vector<Mask> masks;
        for (const ClientState& client : ex.clients) masks.push_back(client.mask);
        ex.server.server_mask = mask_union(masks);
    }
    return ex;
}

ExperimentResult run_rounds(Experiment& ex, int rounds, int eval_every,
                            const RoundObserver& observer) {
    const auto start = Clock::now();
    ExperimentResult result;
    result.classes_overlap = ex.classes_overlap;
    for (int k = 0; k < rounds; ++k) {
        const bool evaluate = ((k + 1) % eval_every == 0) || k == rounds - 1;
        std::optional<RoundRecord> record = run_round(ex, k, evaluate);
        if (observer) {
            observer(ex, k, record ? &*record : nullptr);
        }
        if (record) {
            result.records.push_back(std::move(*record));
        }
    }
    result.final_models.reserve(ex.clients.size());
    for (const ClientState& client : ex.clients) {
        result.final_models.push_back(client.model);
    }
    result.wall_ms = ms_since(start);
    return result;
}

}  // namespace copfl
