#pragma once

#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "neta/types.hpp"

namespace neta {

// One retrieved neighbor: similarity in (0,1], time delta in seconds >= 1.
struct Neighbor {
    SessionId session = -1;
    double similarity = 0.0;
    std::int64_t time_delta = 0;
};

struct NeighborSet {
    std::vector<Neighbor> entries;  // similarity descending, ties by id ascending
    int k = 0;

    bool empty() const { return entries.empty(); }
    size_t size() const { return entries.size(); }
};

struct RetrievalOptions {
    int k = 40;
    // When a query touches more candidates than this, only the most recent
    // ones (by start time) are ranked. Keeps worst-case latency bounded.
    int candidate_cap = 5000;
};

// |a intersect b| / sqrt(|a| * |b|) over binary item-incidence vectors.
// Both sets must be nonempty.
double cosine_similarity(const std::vector<ItemId>& query_items,
                         const std::vector<ItemId>& candidate_items);

// Inverted index over training sessions: session -> item set and its exact
// transpose item -> session set. Immutable once built; reads are thread-safe.
class SessionIndex {
public:
    static SessionIndex build(const std::vector<Session>& train_sessions);

    // Union of posting lists over the query items, minus exclude_session.
    // Sorted ascending; unknown items contribute nothing.
    std::vector<SessionId> candidate_sessions(const std::vector<ItemId>& query_items,
                                              SessionId exclude_session = -1) const;

    // Top-k by cosine similarity among candidates that started strictly before
    // time_cutoff. Ties break by session id ascending.
    NeighborSet top_k_neighbors(const std::vector<ItemId>& query_items,
                                std::int64_t time_cutoff,
                                SessionId exclude_session,
                                const RetrievalOptions& opts) const;

    bool contains(SessionId id) const { return items_of_.count(id) != 0; }
    const std::vector<ItemId>& items_of(SessionId id) const;
    std::int64_t start_time_of(SessionId id) const;
    int session_length(SessionId id) const;
    size_t session_count() const { return items_of_.size(); }
    size_t item_count() const { return sessions_of_.size(); }

    const std::unordered_map<ItemId, std::vector<SessionId>>& postings() const {
        return sessions_of_;
    }

private:
    // items_of_ values are sorted unique item lists (binary incidence).
    std::unordered_map<SessionId, std::vector<ItemId>> items_of_;
    std::unordered_map<ItemId, std::vector<SessionId>> sessions_of_;
    std::unordered_map<SessionId, std::int64_t> start_time_;
};

}  // namespace neta
