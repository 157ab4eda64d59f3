#pragma once

#include <vector>

#include "neta/corpus.hpp"
#include "neta/evaluation.hpp"
#include "neta/model.hpp"
#include "neta/session_index.hpp"

namespace neta {

// Resolve retrieved neighbor ids to their ordered click sequences.
inline std::vector<NeighborInput> neighbor_inputs(const Corpus& train, const NeighborSet& nb) {
    std::vector<NeighborInput> out;
    out.reserve(nb.entries.size());
    for (const Neighbor& n : nb.entries) {
        if (n.session < 0 || static_cast<size_t>(n.session) >= train.sessions.size())
            throw InvalidArgument("neighbor id outside the training corpus");
        out.push_back({train.sessions[static_cast<size_t>(n.session)].items, n.time_delta});
    }
    return out;
}

// Score the full vocabulary for one example: retrieve, encode, fuse, score.
// use_neighbors=false forces the sequence-only path (the encoder head alone).
template <typename Real>
std::vector<double> neta_example_scores(Model<Real>& m, const Corpus& train,
                                        const SessionIndex& index, const TrainingExample& ex,
                                        bool use_neighbors,
                                        const RetrievalOptions& ropts,
                                        std::int64_t* clamp_warnings = nullptr) {
    std::vector<NeighborInput> neighbors;
    if (use_neighbors && m.cfg.neighbors > 0) {
        RetrievalOptions opts = ropts;
        opts.k = m.cfg.neighbors;
        const NeighborSet nb =
            index.top_k_neighbors(ex.prefix, ex.session_time, ex.parent_session, opts);
        neighbors = neighbor_inputs(train, nb);
    }
    Graph<Real> g;
    BoundModel<Real> b = bind_model(m, g, false);
    ForwardDetail<Real> fd =
        model_forward(m, g, b, ex.prefix, -1, neighbors, false, nullptr, clamp_warnings);
    const Tensor<Real>& z = g.value(fd.scores);
    std::vector<double> out(z.data.size());
    for (size_t i = 0; i < z.data.size(); ++i) out[i] = static_cast<double>(z.data[i]);
    return out;
}

template <typename Real>
Scorer make_neta_scorer(Model<Real>& m, const Corpus& train, const SessionIndex& index,
                        bool use_neighbors, RetrievalOptions ropts = {}) {
    return [&m, &train, &index, use_neighbors, ropts](const TrainingExample& ex) {
        return neta_example_scores(m, train, index, ex, use_neighbors, ropts);
    };
}

}  // namespace neta
