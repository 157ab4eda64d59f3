#include "neta/session_index.hpp"

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

size_t intersection_size(const std::vector<ItemId>& a, const std::vector<ItemId>& b) {
    size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++n; ++i; ++j; }
    }
    return n;
}

}  // namespace

double cosine_similarity(const std::vector<ItemId>& query_items,
                         const std::vector<ItemId>& candidate_items) {
    auto a = sorted_unique(query_items);
    auto b = sorted_unique(candidate_items);
    if (a.empty() || b.empty())
        throw InvalidArgument("cosine_similarity requires nonempty item sets");
    const double inter = static_cast<double>(intersection_size(a, b));
    return inter / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

SessionIndex SessionIndex::build(const std::vector<Session>& train_sessions) {
    SessionIndex index;
    for (const auto& s : train_sessions) {
        auto items = sorted_unique(s.items);
        if (items.empty()) continue;
        for (ItemId item : items) index.sessions_of_[item].push_back(s.id);
        index.start_time_.emplace(s.id, s.start_time);
        index.items_of_.emplace(s.id, std::move(items));
    }
    // Posting lists sorted so lookups and merges are deterministic.
    for (auto& [item, sessions] : index.sessions_of_) {
        std::sort(sessions.begin(), sessions.end());
        sessions.erase(std::unique(sessions.begin(), sessions.end()), sessions.end());
    }
    return index;
}

std::vector<SessionId> SessionIndex::candidate_sessions(const std::vector<ItemId>& query_items,
                                                        SessionId exclude_session) const {
    std::vector<SessionId> out;
    for (ItemId item : sorted_unique(query_items)) {
        auto it = sessions_of_.find(item);
        if (it == sessions_of_.end()) continue;
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (exclude_session >= 0) {
        auto it = std::lower_bound(out.begin(), out.end(), exclude_session);
        if (it != out.end() && *it == exclude_session) out.erase(it);
    }
    return out;
}

NeighborSet SessionIndex::top_k_neighbors(const std::vector<ItemId>& query_items,
                                          std::int64_t time_cutoff,
                                          SessionId exclude_session,
                                          const RetrievalOptions& opts) const {
    if (opts.k < 1) throw InvalidArgument("top_k_neighbors requires k >= 1");

    NeighborSet result;
    result.k = opts.k;
    if (query_items.empty()) return result;

    std::vector<SessionId> candidates = candidate_sessions(query_items, exclude_session);
    std::erase_if(candidates, [&](SessionId id) { return start_time_.at(id) >= time_cutoff; });

    if (opts.candidate_cap > 0 && candidates.size() > static_cast<size_t>(opts.candidate_cap)) {
        // Keep the most recent candidates; ties (same start) keep higher ids.
        std::sort(candidates.begin(), candidates.end(), [&](SessionId a, SessionId b) {
            std::int64_t ta = start_time_.at(a), tb = start_time_.at(b);
            if (ta != tb) return ta > tb;
            return a > b;
        });
        candidates.resize(static_cast<size_t>(opts.candidate_cap));
        std::sort(candidates.begin(), candidates.end());
    }
    if (candidates.empty()) return result;

    auto query = sorted_unique(query_items);
    const double query_len = static_cast<double>(query.size());
    std::vector<Neighbor> scored;
    scored.reserve(candidates.size());
    for (SessionId id : candidates) {
        const auto& items = items_of_.at(id);
        const double inter = static_cast<double>(intersection_size(query, items));
        if (inter <= 0.0) continue;  // capped candidate lists may include misses
        Neighbor n;
        n.session = id;
        n.similarity = inter / std::sqrt(query_len * static_cast<double>(items.size()));
        n.time_delta = time_cutoff - start_time_.at(id);
        scored.push_back(n);
    }

    auto better = [](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.session < b.session;
    };
    const size_t keep = std::min(scored.size(), static_cast<size_t>(opts.k));
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), better);
    scored.resize(keep);
    result.entries = std::move(scored);
    return result;
}

const std::vector<ItemId>& SessionIndex::items_of(SessionId id) const {
    auto it = items_of_.find(id);
    if (it == items_of_.end()) throw InvalidArgument("unknown session id in index lookup");
    return it->second;
}

std::int64_t SessionIndex::start_time_of(SessionId id) const {
    auto it = start_time_.find(id);
    if (it == start_time_.end()) throw InvalidArgument("unknown session id in index lookup");
    return it->second;
}

int SessionIndex::session_length(SessionId id) const {
    return static_cast<int>(items_of(id).size());
}

}  // namespace neta
