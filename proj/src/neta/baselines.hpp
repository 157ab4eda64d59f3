#pragma once

#include <unordered_map>
#include <vector>

#include "neta/corpus.hpp"
#include "neta/evaluation.hpp"
#include "neta/session_index.hpp"

namespace neta {

// Train-split statistics shared by the non-neural recommenders; computed
// once, read-only afterwards.
struct BaselineStats {
    std::vector<std::int64_t> global_count;  // clicks per item
    std::vector<std::int64_t> support;       // sessions containing the item
    std::vector<std::unordered_map<ItemId, std::int64_t>> cooc;
    std::int64_t max_global = 0;
    std::int64_t vocab = 0;
};

BaselineStats build_baseline_stats(const Corpus& train);

// Global popularity; ties by item id ascending.
std::vector<ItemId> pop_recommend(const BaselineStats& stats, int n);

// Current-session items first (by within-session frequency), then the most
// popular remaining items.
std::vector<ItemId> spop_recommend(const BaselineStats& stats,
                                   const std::vector<ItemId>& session, int n);

// cooc(a,b) / sqrt(support(a) * support(b)); 0 when never co-clicked.
double itemknn_similarity(const BaselineStats& stats, ItemId a, ItemId b);

// Items most similar to the session's last click; the item itself and items
// with zero similarity are excluded.
std::vector<ItemId> itemknn_recommend(const BaselineStats& stats, ItemId last_item, int n);

// score(i) = sum of neighbor similarities over retrieved neighbors containing
// i; items already in the session are not filtered out.
std::vector<double> sknn_scores(const SessionIndex& index, const std::vector<ItemId>& session,
                                std::int64_t time_cutoff, SessionId exclude_session,
                                const RetrievalOptions& opts, std::int64_t vocab);

std::vector<ItemId> sknn_recommend(const SessionIndex& index, const std::vector<ItemId>& session,
                                   std::int64_t time_cutoff, SessionId exclude_session,
                                   const RetrievalOptions& opts, std::int64_t vocab, int n);

// Full-vocabulary scorers for the evaluation harness.
Scorer make_pop_scorer(const BaselineStats& stats);
Scorer make_spop_scorer(const BaselineStats& stats);
Scorer make_itemknn_scorer(const BaselineStats& stats);
Scorer make_sknn_scorer(const SessionIndex& index, RetrievalOptions opts, std::int64_t vocab);

}  // namespace neta
