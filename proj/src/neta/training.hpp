#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "neta/corpus.hpp"
#include "neta/evaluation.hpp"
#include "neta/model.hpp"
#include "neta/pipeline.hpp"
#include "neta/session_index.hpp"

namespace neta {

struct TrainConfig {
    double lr = 0.0005;
    double lr_decay = 0.9;          // applied once per epoch
    std::int32_t batch_size = 512;
    std::int32_t max_epochs = 30;
    std::int32_t patience = 3;      // epochs without a validation improvement
    double val_fraction = 0.10;
    std::uint64_t seed = 42;
    double clip_norm = 5.0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::int64_t candidate_cap = 5000;

    void validate() const {
        if (lr <= 0 || lr_decay <= 0 || batch_size <= 0 || max_epochs <= 0 || patience <= 0)
            throw InvalidArgument("train config values must be positive");
        if (val_fraction < 0 || val_fraction >= 1)
            throw InvalidArgument("val_fraction must be in [0,1)");
    }
};

struct EpochRecord {
    int epoch = 0;
    std::int64_t step = 0;      // cumulative optimizer updates
    double mean_loss = 0;
    double lr = 0;
    double val_recall20 = -1;   // negative when no validation split exists
    double wall_seconds = 0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    int best_epoch = -1;
    double best_val_recall = -1;
    int epochs_run = 0;
    bool early_stopped = false;
    std::uint64_t final_value_hash = 0;  // hash before best-checkpoint restore
    std::int64_t time_clamp_warnings = 0;
};

using LogFn = std::function<void(const std::string&)>;

// The held-out session ids for a given corpus size: a seeded shuffle of all
// ids, keeping the first fraction. Deterministic and disjoint from training.
inline std::vector<SessionId> validation_sessions(std::int64_t n_sessions, double fraction,
                                                  std::uint64_t seed) {
    const std::int64_t n_val = static_cast<std::int64_t>(std::floor(fraction * static_cast<double>(n_sessions)));
    std::vector<SessionId> ids(static_cast<size_t>(n_sessions));
    for (std::int64_t i = 0; i < n_sessions; ++i) ids[static_cast<size_t>(i)] = static_cast<SessionId>(i);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    rng.shuffle(ids);
    ids.resize(static_cast<size_t>(n_val));
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Mini-batch training with per-epoch learning-rate decay and early stopping
// on validation Recall@20. Validation sessions contribute no gradients and
// are also left out of the retrieval index while training runs, so removing
// them from the input entirely would not change the learned parameters.
template <typename Real>
TrainResult train_model(Model<Real>& model, const Corpus& train, const TrainConfig& cfg,
                        const LogFn& log = nullptr) {
    cfg.validate();
    if (static_cast<std::int64_t>(train.vocab.size()) != model.cfg.vocab)
        throw InvalidArgument("model vocabulary does not match the corpus");
    if (train.sessions.empty()) throw DataError("train_model: empty corpus");
    if (!model.params.values_finite())
        throw DivergenceError("parameters are not finite at the start of training");

    const std::vector<SessionId> val_ids =
        validation_sessions(static_cast<std::int64_t>(train.sessions.size()), cfg.val_fraction, cfg.seed);
    std::unordered_set<SessionId> val_set(val_ids.begin(), val_ids.end());

    std::vector<Session> fit_sessions;
    std::vector<TrainingExample> fit_examples;
    std::vector<TrainingExample> val_examples;
    for (const Session& s : train.sessions) {
        auto expanded = expand_prefixes(s);
        if (val_set.count(s.id)) {
            val_examples.insert(val_examples.end(), expanded.begin(), expanded.end());
        } else {
            fit_sessions.push_back(s);
            fit_examples.insert(fit_examples.end(), expanded.begin(), expanded.end());
        }
    }
    if (fit_examples.empty()) throw DataError("train_model: no training examples after split");

    const SessionIndex index = SessionIndex::build(fit_sessions);
    RetrievalOptions ropts;
    ropts.k = model.cfg.neighbors;
    ropts.candidate_cap = cfg.candidate_cap;

    Rng run_rng(cfg.seed);
    TrainResult result;
    double lr = cfg.lr;
    std::int64_t step = 0;
    std::int64_t clamp_warnings = 0;
    std::vector<Tensor<Real>> best_values;
    int bad_epochs = 0;
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::int64_t> order(fit_examples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int64_t>(i);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        run_rng.shuffle(order);
        double loss_sum = 0;
        std::int64_t loss_count = 0;
        for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.batch_size)) {
            const size_t hi = std::min(order.size(), at + static_cast<size_t>(cfg.batch_size));
            model.params.zero_grads();
            for (size_t i = at; i < hi; ++i) {
                const TrainingExample& ex = fit_examples[static_cast<size_t>(order[i])];
                std::vector<NeighborInput> neighbors;
                if (model.cfg.neighbors > 0) {
                    const NeighborSet nb = index.top_k_neighbors(ex.prefix, ex.session_time,
                                                                 ex.parent_session, ropts);
                    // index ids are full-corpus session ids (id == position)
                    neighbors = neighbor_inputs(train, nb);
                }
                Graph<Real> g;
                BoundModel<Real> b = bind_model(model, g, true);
                ForwardDetail<Real> fd = model_forward(model, g, b, ex.prefix, ex.label,
                                                       neighbors, true, &run_rng, &clamp_warnings);
                const double loss = static_cast<double>(g.value(fd.loss).data[0]);
                if (!std::isfinite(loss))
                    throw DivergenceError("loss is not finite at epoch " + std::to_string(epoch) +
                                          ", step " + std::to_string(step + 1));
                loss_sum += loss;
                ++loss_count;
                g.backward(fd.loss);
            }
            model.params.scale_grads(1.0 / static_cast<double>(hi - at));
            model.params.clip_grads(cfg.clip_norm);
            if (!model.params.grads_finite())
                throw DivergenceError("gradient is not finite at epoch " + std::to_string(epoch));
            ++step;
            model.params.adam_step(lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, step);
        }
        if (!model.params.values_finite())
            throw DivergenceError("parameters diverged at epoch " + std::to_string(epoch));

        EpochRecord rec;
        rec.epoch = epoch;
        rec.step = step;
        rec.mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
        rec.lr = lr;
        lr *= cfg.lr_decay;

        if (!val_examples.empty()) {
            std::vector<std::int64_t> ranks(val_examples.size());
            for (size_t i = 0; i < val_examples.size(); ++i) {
                const std::vector<double> scores = neta_example_scores(
                    model, train, index, val_examples[i], true, ropts, &clamp_warnings);
                ranks[i] = rank_of_target(scores, val_examples[i].label);
            }
            rec.val_recall20 = recall_at_k(ranks, 20);
        }
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.push_back(rec);
        result.epochs_run = epoch;
        if (log) {
            char line[192];
            std::snprintf(line, sizeof(line),
                          "epoch=%d step=%lld loss=%.6f lr=%.8f val_recall@20=%.6f wall_time=%.3f",
                          epoch, static_cast<long long>(step), rec.mean_loss, rec.lr,
                          rec.val_recall20, rec.wall_seconds);
            log(line);
        }

        if (!val_examples.empty()) {
            if (rec.val_recall20 > result.best_val_recall) {
                result.best_val_recall = rec.val_recall20;
                result.best_epoch = epoch;
                best_values = model.params.snapshot_values();
                bad_epochs = 0;
            } else if (++bad_epochs >= cfg.patience) {
                result.early_stopped = true;
                break;
            }
        }
    }

    result.final_value_hash = model.params.value_hash();
    result.time_clamp_warnings = clamp_warnings;
    if (!best_values.empty()) model.params.restore_values(best_values);
    return result;
}

}  // namespace neta
