#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "neta/error.hpp"

namespace neta {

using ItemId = std::int32_t;
using SessionId = std::int32_t;

// One parsed line of a raw click log.
struct ClickEvent {
    std::string actor_id;
    std::string item_id;
    std::int64_t timestamp = 0;  // seconds since epoch
    std::int64_t row = 0;        // input row number, tie-break for stable sorts
};

// A session after item ids have been mapped to dense integers.
struct Session {
    SessionId id = 0;
    std::vector<ItemId> items;       // ordered by click time
    std::int64_t start_time = 0;     // first click's timestamp
    std::string actor;               // empty when the source had no actor
};

// Sessionized clicks before any vocabulary exists; items are external strings.
struct RawSession {
    std::vector<std::string> items;
    std::int64_t start_time = 0;
    std::string actor;
    std::int64_t first_row = 0;
};

// Bijective map between external item strings and dense ids in [0, size).
class ItemVocabulary {
public:
    ItemId add(const std::string& external) {
        auto it = forward_.find(external);
        if (it != forward_.end()) return it->second;
        ItemId id = static_cast<ItemId>(reverse_.size());
        forward_.emplace(external, id);
        reverse_.push_back(external);
        return id;
    }

    // -1 when unknown.
    ItemId lookup(const std::string& external) const {
        auto it = forward_.find(external);
        return it == forward_.end() ? ItemId{-1} : it->second;
    }

    const std::string& external(ItemId id) const { return reverse_.at(static_cast<size_t>(id)); }

    std::size_t size() const { return reverse_.size(); }

    const std::vector<std::string>& all() const { return reverse_; }

private:
    std::unordered_map<std::string, ItemId> forward_;
    std::vector<std::string> reverse_;
};

// One prefix/label pair produced by prefix expansion.
struct TrainingExample {
    std::vector<ItemId> prefix;
    ItemId label = 0;
    std::int64_t session_time = 0;   // start time of the parent session
    SessionId parent_session = -1;   // excluded from neighbor retrieval
};

}  // namespace neta
