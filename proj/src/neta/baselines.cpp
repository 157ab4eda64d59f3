#include "neta/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "neta/error.hpp"

namespace neta {

namespace {

std::vector<ItemId> sorted_unique(const std::vector<ItemId>& items) {
    std::vector<ItemId> out = items;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Ranked ids for strictly positive scores; ties by id ascending.
std::vector<ItemId> top_n_positive(const std::vector<double>& scores, int n) {
    std::vector<ItemId> ids;
    for (size_t i = 0; i < scores.size(); ++i)
        if (scores[i] > 0.0) ids.push_back(static_cast<ItemId>(i));
    std::sort(ids.begin(), ids.end(), [&](ItemId a, ItemId b) {
        const double sa = scores[static_cast<size_t>(a)], sb = scores[static_cast<size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    if (static_cast<int>(ids.size()) > n) ids.resize(static_cast<size_t>(n));
    return ids;
}

}  // namespace

BaselineStats build_baseline_stats(const Corpus& train) {
    BaselineStats stats;
    stats.vocab = static_cast<std::int64_t>(train.vocab.size());
    stats.global_count.assign(static_cast<size_t>(stats.vocab), 0);
    stats.support.assign(static_cast<size_t>(stats.vocab), 0);
    stats.cooc.resize(static_cast<size_t>(stats.vocab));
    for (const Session& s : train.sessions) {
        for (ItemId item : s.items) {
            if (item < 0 || item >= stats.vocab)
                throw DataError("baseline stats: item outside vocabulary");
            ++stats.global_count[static_cast<size_t>(item)];
        }
        const auto uniq = sorted_unique(s.items);
        for (ItemId item : uniq) ++stats.support[static_cast<size_t>(item)];
        for (size_t i = 0; i < uniq.size(); ++i)
            for (size_t j = i + 1; j < uniq.size(); ++j) {
                ++stats.cooc[static_cast<size_t>(uniq[i])][uniq[j]];
                ++stats.cooc[static_cast<size_t>(uniq[j])][uniq[i]];
            }
    }
    for (std::int64_t c : stats.global_count) stats.max_global = std::max(stats.max_global, c);
    return stats;
}

std::vector<ItemId> pop_recommend(const BaselineStats& stats, int n) {
    std::vector<double> scores(stats.global_count.begin(), stats.global_count.end());
    return top_n_positive(scores, n);
}

namespace {

std::vector<double> spop_score_vector(const BaselineStats& stats,
                                      const std::vector<ItemId>& session) {
    // Composite score: any within-session occurrence outranks every global
    // count, within-session ties fall back to popularity, then id.
    const double big = static_cast<double>(stats.max_global + 1);
    std::vector<double> scores(stats.global_count.begin(), stats.global_count.end());
    for (ItemId item : session)
        if (item >= 0 && item < stats.vocab) scores[static_cast<size_t>(item)] += big;
    return scores;
}

}  // namespace

std::vector<ItemId> spop_recommend(const BaselineStats& stats,
                                   const std::vector<ItemId>& session, int n) {
    return top_n_positive(spop_score_vector(stats, session), n);
}

double itemknn_similarity(const BaselineStats& stats, ItemId a, ItemId b) {
    if (a < 0 || a >= stats.vocab || b < 0 || b >= stats.vocab)
        throw InvalidArgument("itemknn_similarity: item outside vocabulary");
    const auto& row = stats.cooc[static_cast<size_t>(a)];
    const auto it = row.find(b);
    if (it == row.end()) return 0.0;
    const double denom = std::sqrt(static_cast<double>(stats.support[static_cast<size_t>(a)]) *
                                   static_cast<double>(stats.support[static_cast<size_t>(b)]));
    return static_cast<double>(it->second) / denom;
}

namespace {

std::vector<double> itemknn_score_vector(const BaselineStats& stats, ItemId last_item) {
    if (last_item < 0 || last_item >= stats.vocab)
        throw InvalidArgument("itemknn: last item outside vocabulary");
    std::vector<double> scores(static_cast<size_t>(stats.vocab), 0.0);
    for (const auto& [other, count] : stats.cooc[static_cast<size_t>(last_item)])
        scores[static_cast<size_t>(other)] = itemknn_similarity(stats, last_item, other);
    scores[static_cast<size_t>(last_item)] = -1.0;  // never recommend the anchor itself
    return scores;
}

}  // namespace

std::vector<ItemId> itemknn_recommend(const BaselineStats& stats, ItemId last_item, int n) {
    return top_n_positive(itemknn_score_vector(stats, last_item), n);
}

std::vector<double> sknn_scores(const SessionIndex& index, const std::vector<ItemId>& session,
                                std::int64_t time_cutoff, SessionId exclude_session,
                                const RetrievalOptions& opts, std::int64_t vocab) {
    std::vector<double> scores(static_cast<size_t>(vocab), 0.0);
    if (session.empty()) return scores;
    const NeighborSet nb = index.top_k_neighbors(session, time_cutoff, exclude_session, opts);
    for (const Neighbor& n : nb.entries)
        // membership, not occurrence count: a repeated item still adds sim once
        for (ItemId item : sorted_unique(index.items_of(n.session)))
            if (item >= 0 && item < vocab) scores[static_cast<size_t>(item)] += n.similarity;
    return scores;
}

std::vector<ItemId> sknn_recommend(const SessionIndex& index, const std::vector<ItemId>& session,
                                   std::int64_t time_cutoff, SessionId exclude_session,
                                   const RetrievalOptions& opts, std::int64_t vocab, int n) {
    return top_n_positive(sknn_scores(index, session, time_cutoff, exclude_session, opts, vocab), n);
}

Scorer make_pop_scorer(const BaselineStats& stats) {
    return [&stats](const TrainingExample&) {
        return std::vector<double>(stats.global_count.begin(), stats.global_count.end());
    };
}

Scorer make_spop_scorer(const BaselineStats& stats) {
    return [&stats](const TrainingExample& ex) { return spop_score_vector(stats, ex.prefix); };
}

Scorer make_itemknn_scorer(const BaselineStats& stats) {
    return [&stats](const TrainingExample& ex) {
        return itemknn_score_vector(stats, ex.prefix.back());
    };
}

Scorer make_sknn_scorer(const SessionIndex& index, RetrievalOptions opts, std::int64_t vocab) {
    return [&index, opts, vocab](const TrainingExample& ex) {
        return sknn_scores(index, ex.prefix, ex.session_time, ex.parent_session, opts, vocab);
    };
}

}  // namespace neta
