// Acceptance gate: runs the ten release criteria and prints one line each.
// Exit is nonzero when any non-skipped criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "neta/baselines.hpp"
#include "neta/corpus.hpp"
#include "neta/evaluation.hpp"
#include "neta/gradcheck.hpp"
#include "neta/model.hpp"
#include "neta/pipeline.hpp"
#include "neta/session_index.hpp"
#include "neta/training.hpp"

using namespace neta;

namespace {

struct Outcome {
    bool ok = true;
    bool skipped = false;
    std::string detail;
};

Outcome pass(std::string detail = "") { return {true, false, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, false, std::move(detail)}; }
Outcome skip(std::string detail) { return {true, true, std::move(detail)}; }

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

Outcome retrieval_oracle() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(101);
    const std::int64_t vocab = 500, count = 5000;
    std::vector<Session> sessions;
    sessions.reserve(static_cast<size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        const std::int64_t len = rng.uniform_int(2, 12);
        std::vector<ItemId> items;
        for (std::int64_t j = 0; j < len; ++j)
            items.push_back(static_cast<ItemId>(rng.uniform_int(0, vocab - 1)));
        sessions.push_back(testutil::make_session(static_cast<SessionId>(i), items,
                                                  100000 + 7 * i));
    }
    const SessionIndex index = SessionIndex::build(sessions);

    std::vector<std::set<ItemId>> unique(sessions.size());
    for (size_t i = 0; i < sessions.size(); ++i)
        unique[i] = std::set<ItemId>(sessions[i].items.begin(), sessions[i].items.end());

    for (int q = 0; q < 200; ++q) {
        const std::int64_t qlen = rng.uniform_int(1, 12);
        std::vector<ItemId> query;
        for (std::int64_t j = 0; j < qlen; ++j)
            query.push_back(static_cast<ItemId>(rng.uniform_int(0, vocab - 1)));
        const std::int64_t cutoff = 100000 + rng.uniform_int(1, 7 * count + 1000);
        const SessionId exclude = static_cast<SessionId>(rng.uniform_int(-1, count - 1));
        const std::set<ItemId> qset(query.begin(), query.end());

        struct Hit {
            SessionId id;
            double sim;
            std::int64_t delta;
        };
        std::vector<Hit> brute;
        for (const Session& s : sessions) {
            if (s.id == exclude || s.start_time >= cutoff) continue;
            const auto& u = unique[static_cast<size_t>(s.id)];
            std::int64_t inter = 0;
            for (ItemId it : qset) inter += u.count(it);
            if (inter == 0) continue;
            const double sim = static_cast<double>(inter) /
                               std::sqrt(static_cast<double>(qset.size()) *
                                         static_cast<double>(u.size()));
            brute.push_back({s.id, sim, cutoff - s.start_time});
        }
        std::sort(brute.begin(), brute.end(), [](const Hit& a, const Hit& b) {
            if (a.sim != b.sim) return a.sim > b.sim;
            return a.id < b.id;
        });

        for (int k : {1, 5, 40}) {
            RetrievalOptions opts;
            opts.k = k;
            opts.candidate_cap = 1 << 30;
            const NeighborSet nb = index.top_k_neighbors(query, cutoff, exclude, opts);
            const size_t expect = std::min(static_cast<size_t>(k), brute.size());
            if (nb.entries.size() != expect)
                return fail(fmt("query %d k=%d returned %zu of %zu", q, k, nb.entries.size(),
                                expect));
            for (size_t i = 0; i < expect; ++i) {
                const Neighbor& n = nb.entries[i];
                const Hit& h = brute[i];
                if (n.session != h.id || n.time_delta != h.delta ||
                    std::fabs(n.similarity - h.sim) > 1e-12)
                    return fail(fmt("query %d k=%d rank %zu: got (%lld, %.12f, %lld), want "
                                    "(%lld, %.12f, %lld)",
                                    q, k, i, static_cast<long long>(n.session), n.similarity,
                                    static_cast<long long>(n.time_delta),
                                    static_cast<long long>(h.id), h.sim,
                                    static_cast<long long>(h.delta)));
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= 30.0) return fail(fmt("took %.1fs, limit 30s", secs));
    return pass(fmt("200 queries, k in {1,5,40}, %.1fs", secs));
}

// ---------------------------------------------------------------- criterion 2

Outcome gradient_check() {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    for (EncoderKind enc : {EncoderKind::Narm, EncoderKind::Stamp}) {
        ModelConfig cfg;
        cfg.encoder = enc;
        cfg.dim = 8;
        cfg.heads = 2;
        cfg.neighbors = 3;
        cfg.vocab = 50;
        cfg.time_head = true;
        cfg.time_dim = 8;
        Model<double> m(cfg, enc == EncoderKind::Narm ? 202 : 203);
        const std::vector<NeighborInput> neighbors = {
            {{0, 4, 7, 21}, 60}, {{2, 3, 44}, 86400}, {{5, 6, 8, 9, 30}, 604800}};
        auto res = check_gradients(m.params, [&]() {
            Graph<double> g;
            auto b = bind_model(m, g, true);
            auto out = model_forward(m, g, b, {1, 10, 49}, 3, neighbors, false, nullptr);
            g.backward(out.loss);
            return g.value(out.loss).data[0];
        }, 5e-4);
        if (res.checked != m.params.total_values())
            return fail(fmt("%s checked %lld of %lld values", encoder_name(enc),
                            static_cast<long long>(res.checked),
                            static_cast<long long>(m.params.total_values())));
        if (!res.ok())
            return fail(fmt("%s max relative error %.3e at %s (tolerance 1e-4)",
                            encoder_name(enc), res.max_rel_err, res.worst.c_str()));
        detail += fmt("%s max_rel=%.2e ", encoder_name(enc), res.max_rel_err);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= 120.0) return fail(fmt("took %.1fs, limit 120s", secs));
    return pass(detail + fmt("%.1fs", secs));
}

// ---------------------------------------------------------------- criterion 3

Outcome normalization_suite() {
    Rng rng(303);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        ModelConfig cfg;
        cfg.encoder = trial % 2 ? EncoderKind::Narm : EncoderKind::Stamp;
        cfg.dim = trial % 3 ? 8 : 4;
        cfg.time_head = trial % 5 != 0;
        cfg.heads = cfg.time_head ? (trial % 4 == 1 ? 4 : 2) : (trial % 4 == 1 ? 1 : 2);
        if (cfg.dim % cfg.heads) cfg.heads = 2;
        cfg.time_dim = 3;
        cfg.vocab = 12;
        cfg.neighbors = 6;
        Model<double> m(cfg, 9000 + static_cast<std::uint64_t>(trial));

        const std::int64_t plen = rng.uniform_int(1, 6);
        std::vector<ItemId> prefix;
        for (std::int64_t j = 0; j < plen; ++j)
            prefix.push_back(static_cast<ItemId>(rng.uniform_int(0, 11)));
        std::vector<NeighborInput> neighbors;
        const std::int64_t nn = rng.uniform_int(1, 6);
        for (std::int64_t j = 0; j < nn; ++j) {
            NeighborInput nb;
            const std::int64_t len = rng.uniform_int(1, 5);
            for (std::int64_t t = 0; t < len; ++t)
                nb.items.push_back(static_cast<ItemId>(rng.uniform_int(0, 11)));
            nb.time_delta = rng.uniform_int(1, 1000000);
            neighbors.push_back(nb);
        }

        Graph<double> g;
        auto b = bind_model(m, g, false);
        auto out = model_forward(m, g, b, prefix, 1, neighbors, false, nullptr);

        auto check_sum_one = [&](Var v, const char* what) -> std::string {
            if (v < 0) return fmt("trial %d: %s missing", trial, what);
            double total = 0.0;
            for (double x : g.value(v).data) {
                if (x < -1e-12) return fmt("trial %d: %s has negative weight", trial, what);
                total += x;
            }
            worst = std::max(worst, std::fabs(total - 1.0));
            if (std::fabs(total - 1.0) > 1e-6)
                return fmt("trial %d: %s sums to %.9f", trial, what, total);
            return "";
        };

        for (size_t h = 0; h < out.nrep.detail.head_weights.size(); ++h) {
            const std::string err =
                check_sum_one(out.nrep.detail.head_weights[h], fmt("head %zu", h).c_str());
            if (!err.empty()) return fail(err);
        }
        if (out.current.attn_weights >= 0) {
            const std::string err = check_sum_one(out.current.attn_weights, "encoder weights");
            if (!err.empty()) return fail(err);
        }
        const std::string err = check_sum_one(out.yhat, "yhat");
        if (!err.empty()) return fail(err);
    }
    return pass(fmt("1000 configurations, worst |sum-1| = %.1e", worst));
}

// ---------------------------------------------------------------- criterion 4

Outcome permutation_invariance() {
    Rng rng(404);
    double worst = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        ModelConfig cfg;
        cfg.encoder = seed % 2 ? EncoderKind::Stamp : EncoderKind::Narm;
        cfg.dim = 16;
        cfg.heads = 4;
        cfg.vocab = 30;
        cfg.neighbors = 5;
        cfg.time_dim = 4;
        Model<double> m(cfg, 600 + static_cast<std::uint64_t>(seed));

        std::vector<ItemId> prefix = {static_cast<ItemId>(rng.uniform_int(0, 29)),
                                      static_cast<ItemId>(rng.uniform_int(0, 29)),
                                      static_cast<ItemId>(rng.uniform_int(0, 29))};
        std::vector<NeighborInput> base;
        for (int j = 0; j < 5; ++j) {
            NeighborInput nb;
            const std::int64_t len = rng.uniform_int(2, 6);
            for (std::int64_t t = 0; t < len; ++t)
                nb.items.push_back(static_cast<ItemId>(rng.uniform_int(0, 29)));
            nb.time_delta = rng.uniform_int(1, 2000000);
            base.push_back(nb);
        }

        auto run = [&](const std::vector<NeighborInput>& nbs) {
            Graph<double> g;
            auto b = bind_model(m, g, false);
            auto out = model_forward(m, g, b, prefix, 1, nbs, false, nullptr);
            return std::make_pair(g.value(out.nrep.c_neighbor).data, g.value(out.yhat).data);
        };
        const auto [c0, y0] = run(base);

        for (int p = 0; p < 10; ++p) {
            std::vector<size_t> order(base.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            rng.shuffle(order);
            std::vector<NeighborInput> shuffled;
            for (size_t i : order) shuffled.push_back(base[i]);
            const auto [c1, y1] = run(shuffled);
            for (size_t i = 0; i < c0.size(); ++i)
                worst = std::max(worst, std::fabs(c0[i] - c1[i]));
            for (size_t i = 0; i < y0.size(); ++i)
                worst = std::max(worst, std::fabs(y0[i] - y1[i]));
            if (worst > 1e-6)
                return fail(fmt("seed %d perm %d drifted by %.3e", seed, p, worst));
        }
    }
    return pass(fmt("20 seeds x 10 permutations, worst drift %.1e", worst));
}

// ---------------------------------------------------------------- criterion 5

Outcome overfit_sanity() {
    const auto start = std::chrono::steady_clock::now();
    // deterministic ring transitions: item i is always followed by i+1 mod 25
    const std::int64_t vocab = 25;
    std::vector<std::pair<std::vector<ItemId>, std::int64_t>> rows;
    for (int i = 0; i < 50; ++i) {
        std::vector<ItemId> items;
        for (int j = 0; j < 5; ++j) items.push_back(static_cast<ItemId>((i + j) % vocab));
        rows.push_back({items, 1000 + 600 * static_cast<std::int64_t>(i)});
    }
    Corpus train = testutil::make_corpus(vocab, rows);

    ModelConfig cfg;
    cfg.encoder = EncoderKind::Narm;
    cfg.dim = 16;
    cfg.heads = 4;
    cfg.neighbors = 10;
    cfg.vocab = static_cast<std::int32_t>(vocab);
    cfg.time_dim = 4;
    Model<float> m(cfg, 7);

    TrainConfig tc;
    tc.lr = 0.01;
    tc.batch_size = 32;
    tc.max_epochs = 200;
    tc.val_fraction = 0.0;
    tc.seed = 7;
    train_model(m, train, tc);

    const SessionIndex index = SessionIndex::build(train.sessions);
    RetrievalOptions ropts;
    auto scorer = make_neta_scorer(m, train, index, true, ropts);
    const auto examples = expand_corpus(train);
    const EvalReport report = evaluate(scorer, examples, {1});
    const double recall1 = report.recall.at(1);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= 300.0) return fail(fmt("took %.1fs, limit 300s", secs));
    if (recall1 < 0.9)
        return fail(fmt("training-prefix recall@1 = %.3f after 200 epochs", recall1));
    return pass(fmt("training-prefix recall@1 = %.3f, %.1fs", recall1, secs));
}

// ---------------------------------------------------------------- criterion 6

struct ClusterData {
    Corpus train;
    Corpus test;
};

ClusterData make_cluster_corpus(std::uint64_t seed) {
    // 10 clusters of 10 items; each association pairs three items of one
    // cluster with a label from outside that cluster. The association is
    // recoverable from a retrieved twin session, while 200 arbitrary
    // mappings defeat pure sequence memorization.
    Rng rng(seed);
    const std::int64_t vocab = 100;
    const int n_assoc = 200;
    std::vector<std::pair<std::vector<ItemId>, std::int64_t>> train_rows;
    std::vector<std::vector<ItemId>> test_sessions;
    for (int i = 0; i < n_assoc; ++i) {
        const std::int64_t c = i % 10;
        std::vector<ItemId> members;
        for (std::int64_t j = 0; j < 10; ++j) members.push_back(static_cast<ItemId>(10 * c + j));
        rng.shuffle(members);
        std::vector<ItemId> x(members.begin(), members.begin() + 3);
        ItemId label;
        do {
            label = static_cast<ItemId>(rng.uniform_int(0, vocab - 1));
        } while (label / 10 == c);

        std::vector<ItemId> h1 = {x[0], x[1], x[2], label};
        std::vector<ItemId> h2 = {x[2], x[0], x[1], label};
        train_rows.push_back({h1, 10000 + 50 * static_cast<std::int64_t>(i)});
        train_rows.push_back({h2, 10000 + 50 * static_cast<std::int64_t>(i) + 25});
        test_sessions.push_back({x[1], x[2], x[0], label});
    }
    ClusterData data;
    data.train = testutil::make_corpus(vocab, train_rows);
    data.test.vocab = data.train.vocab;
    for (size_t i = 0; i < test_sessions.size(); ++i)
        data.test.sessions.push_back(testutil::make_session(
            static_cast<SessionId>(10000 + i), test_sessions[i],
            200000 + 50 * static_cast<std::int64_t>(i)));
    return data;
}

double train_and_recall20(const Corpus& train, const Corpus& test, int neighbors,
                          bool time_head, std::uint64_t seed, int epochs, double lr) {
    ModelConfig cfg;
    cfg.encoder = EncoderKind::Narm;
    cfg.dim = 16;
    cfg.heads = 2;
    cfg.neighbors = neighbors;
    cfg.vocab = static_cast<std::int32_t>(train.vocab.size());
    cfg.time_head = time_head;
    cfg.time_dim = 4;
    Model<float> m(cfg, seed);
    TrainConfig tc;
    tc.lr = lr;
    tc.batch_size = 64;
    tc.max_epochs = epochs;
    tc.val_fraction = 0.0;
    tc.seed = seed;
    train_model(m, train, tc);

    const SessionIndex index = SessionIndex::build(train.sessions);
    RetrievalOptions ropts;
    auto scorer = make_neta_scorer(m, train, index, true, ropts);
    const EvalReport report = evaluate(scorer, expand_corpus(test), {20});
    return report.recall.at(20);
}

Outcome neighborhood_benefit() {
    double with_sum = 0.0, without_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ClusterData data = make_cluster_corpus(7000 + seed);
        with_sum += train_and_recall20(data.train, data.test, 8, true, seed, 12, 0.01);
        without_sum += train_and_recall20(data.train, data.test, 0, true, seed, 12, 0.01);
    }
    const double with_mean = with_sum / 5.0, without_mean = without_sum / 5.0;
    if (with_mean - without_mean < 0.02)
        return fail(fmt("recall@20 with neighbors %.4f vs without %.4f, gap %.4f < 0.02",
                        with_mean, without_mean, with_mean - without_mean));
    return pass(fmt("recall@20 %.4f with neighbors vs %.4f without, 5 seeds", with_mean,
                    without_mean));
}

// ---------------------------------------------------------------- criterion 7

ClusterData make_drift_corpus(std::uint64_t seed) {
    // one cue, five fillers, sixty labels; the first era draws labels from
    // the early half and the second era from the late half. Era sessions are
    // interleaved by id so similarity ties retrieve both eras; only the
    // session timestamps separate them.
    Rng rng(seed);
    const std::int64_t vocab = 66;
    const int per_era = 150;
    std::vector<std::pair<std::vector<ItemId>, std::int64_t>> rows;
    for (int i = 0; i < per_era; ++i) {
        const ItemId filler_a = static_cast<ItemId>(1 + rng.uniform_int(0, 4));
        const ItemId label_a = static_cast<ItemId>(6 + rng.uniform_int(0, 29));
        rows.push_back({{0, filler_a, label_a}, 10000 + 10 * static_cast<std::int64_t>(i)});
        const ItemId filler_b = static_cast<ItemId>(1 + rng.uniform_int(0, 4));
        const ItemId label_b = static_cast<ItemId>(36 + rng.uniform_int(0, 29));
        rows.push_back({{0, filler_b, label_b}, 100000 + 10 * static_cast<std::int64_t>(i)});
    }
    ClusterData data;
    data.train = testutil::make_corpus(vocab, rows);
    data.test.vocab = data.train.vocab;
    for (int i = 0; i < 60; ++i) {
        const ItemId filler = static_cast<ItemId>(1 + rng.uniform_int(0, 4));
        const ItemId label = static_cast<ItemId>(36 + rng.uniform_int(0, 29));
        data.test.sessions.push_back(testutil::make_session(
            static_cast<SessionId>(10000 + i), {0, filler, label},
            200000 + 10 * static_cast<std::int64_t>(i)));
    }
    return data;
}

Outcome time_head_direction() {
    double on_sum = 0.0, off_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ClusterData data = make_drift_corpus(8000 + seed);
        on_sum += train_and_recall20(data.train, data.test, 40, true, seed, 8, 0.01);
        off_sum += train_and_recall20(data.train, data.test, 40, false, seed, 8, 0.01);
    }
    const double on_mean = on_sum / 5.0, off_mean = off_sum / 5.0;
    if (on_mean + 1e-9 < off_mean)
        return fail(fmt("recall@20 with time head %.4f < %.4f without", on_mean, off_mean));
    return pass(fmt("recall@20 %.4f with time head vs %.4f without, 5 seeds", on_mean,
                    off_mean));
}

// ---------------------------------------------------------------- criterion 8

Outcome metric_oracles() {
    const std::vector<std::int64_t> worked = {1, 2, 4, 25};
    if (recall_at_k(worked, 20) != 0.75)
        return fail(fmt("recall@20 of {1,2,4,25} is %.17g, want 0.75", recall_at_k(worked, 20)));
    if (mrr_at_k(worked, 20) != 0.4375)
        return fail(fmt("mrr@20 of {1,2,4,25} is %.17g, want 0.4375", mrr_at_k(worked, 20)));

    Rng rng(808);
    std::vector<std::int64_t> ranks;
    for (int i = 0; i < 500; ++i) ranks.push_back(rng.uniform_int(1, 50));
    for (int k : {1, 5, 10, 20, 50}) {
        std::int64_t hits = 0;
        double rr = 0.0;
        for (std::int64_t r : ranks) {
            if (r <= k) {
                ++hits;
                rr += 1.0 / static_cast<double>(r);
            }
        }
        const double recall_ref = static_cast<double>(hits) / 500.0;
        const double mrr_ref = rr / 500.0;
        if (recall_at_k(ranks, k) != recall_ref)
            return fail(fmt("recall@%d diverges from the rank-trace recount", k));
        if (mrr_at_k(ranks, k) != mrr_ref)
            return fail(fmt("mrr@%d diverges from the rank-trace recount", k));
    }
    return pass("worked examples bit-exact, 500-rank recount bit-exact");
}

// ---------------------------------------------------------------- criterion 9

Outcome preprocess_fidelity() {
    const char* path = std::getenv("NETA_DIGINETICA_PATH");
    if (!path || !*path)
        return skip("NETA_DIGINETICA_PATH not set; full-corpus check needs the dataset");
    PreprocessOptions opts;  // 30 min gap, support 5, length 2, 7 day window
    const PreprocessResult res = preprocess_log(path, opts);
    const auto& s = res.summary;
    auto within = [](double got, double want) {
        return std::fabs(got - want) <= 0.02 * want;
    };
    const bool ok_examples = within(static_cast<double>(s.train_examples), 719470.0);
    const bool ok_clicks = within(static_cast<double>(s.clicks), 982961.0);
    const bool ok_items = within(static_cast<double>(s.items), 43097.0);
    const std::string detail =
        fmt("train_examples=%lld clicks=%lld items=%lld (targets 719470/982961/43097, 2%%)",
            static_cast<long long>(s.train_examples), static_cast<long long>(s.clicks),
            static_cast<long long>(s.items));
    if (!(ok_examples && ok_clicks && ok_items)) return fail(detail);
    return pass(detail);
}

// --------------------------------------------------------------- criterion 10

Outcome checkpoint_roundtrip() {
    Rng rng(1010);
    const std::int64_t vocab = 40;
    std::vector<std::pair<std::vector<ItemId>, std::int64_t>> rows;
    for (int i = 0; i < 150; ++i) {
        const std::int64_t len = rng.uniform_int(3, 8);
        std::vector<ItemId> items;
        for (std::int64_t j = 0; j < len; ++j)
            items.push_back(static_cast<ItemId>(rng.uniform_int(0, vocab - 1)));
        rows.push_back({items, 1000 + 60 * static_cast<std::int64_t>(i)});
    }
    Corpus train = testutil::make_corpus(vocab, rows);
    Corpus test;
    test.vocab = train.vocab;
    for (int i = 0; i < 30; ++i) {
        const std::int64_t len = rng.uniform_int(3, 8);
        std::vector<ItemId> items;
        for (std::int64_t j = 0; j < len; ++j)
            items.push_back(static_cast<ItemId>(rng.uniform_int(0, vocab - 1)));
        test.sessions.push_back(testutil::make_session(static_cast<SessionId>(1000 + i), items,
                                                       50000 + 60 * static_cast<std::int64_t>(i)));
    }

    ModelConfig cfg;
    cfg.encoder = EncoderKind::Stamp;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.neighbors = 5;
    cfg.vocab = static_cast<std::int32_t>(vocab);
    cfg.time_dim = 3;
    Model<float> m(cfg, 11);
    TrainConfig tc;
    tc.lr = 0.005;
    tc.batch_size = 64;
    tc.max_epochs = 2;
    tc.val_fraction = 0.0;
    tc.seed = 11;
    train_model(m, train, tc);

    auto examples = expand_corpus(test);
    if (examples.size() > 100) examples.resize(100);
    const SessionIndex index = SessionIndex::build(train.sessions);
    RetrievalOptions ropts;

    std::vector<std::vector<double>> before;
    for (const auto& ex : examples)
        before.push_back(neta_example_scores(m, train, index, ex, true, ropts));

    testutil::TempDir dir("accept_ckpt");
    const std::string path = dir.file("model.ckpt");
    save_checkpoint(m, path);
    Model<float> loaded = load_checkpoint<float>(path);

    for (size_t i = 0; i < examples.size(); ++i) {
        const auto after = neta_example_scores(loaded, train, index, examples[i], true, ropts);
        if (after != before[i]) return fail(fmt("scores differ on example %zu", i));
    }
    return pass(fmt("%zu examples scored bit-identically after reload", examples.size()));
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries = {
        {1, "retrieval oracle equivalence", retrieval_oracle},
        {2, "gradient correctness", gradient_check},
        {3, "normalization suite", normalization_suite},
        {4, "neighbor permutation invariance", permutation_invariance},
        {5, "overfit sanity", overfit_sanity},
        {6, "neighborhood benefit", neighborhood_benefit},
        {7, "time head direction", time_head_direction},
        {8, "metric oracles", metric_oracles},
        {9, "preprocessing fidelity", preprocess_fidelity},
        {10, "checkpoint round trip", checkpoint_roundtrip},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        const double t0 = now_seconds();
        Outcome out;
        try {
            out = e.run();
        } catch (const std::exception& ex) {
            out = fail(fmt("exception: %s", ex.what()));
        }
        const double secs = now_seconds() - t0;
        const char* verdict = out.skipped ? "SKIP" : (out.ok ? "PASS" : "FAIL");
        std::printf("criterion %2d %-34s %s%s%s [%.1fs]\n", e.id, e.name, verdict,
                    out.detail.empty() ? "" : " - ", out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.ok) ++failures;
    }
    if (failures) std::printf("acceptance: %d criterion(s) failed\n", failures);
    else std::printf("acceptance: all live criteria passed\n");
    return failures ? 1 : 0;
}
