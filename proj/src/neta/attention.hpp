#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "neta/graph.hpp"
#include "neta/params.hpp"

namespace neta {

// Graph handles for one multi-head block. Projections are [d x d_h] applied
// on the right (x W); the output projection is [(h*d_h) x d].
template <typename Real>
struct AttentionVars {
    struct Head {
        Var Wq, Wk, Wv;
    };
    std::vector<Head> heads;
    Var Wo;
    bool time_head = false;
    Var Wt = -1;      // [d_t], multiplies the scalar log-delta
    Var bt = -1;      // [d_t]
    Var Walpha = -1;  // [d_t] raw; softplus keeps the modulator positive
};

template <typename Real>
struct HeadResult {
    Var f;        // [d_h]
    Var weights;  // [n]
};

// weights = softmax(K q / sqrt(d_h)); f = weights^T V.
template <typename Real>
HeadResult<Real> scaled_dot_attention(Graph<Real>& g, Var q, Var K, Var V) {
    const auto& Kt = g.value(K);
    check_shape<Real>(Kt.is_matrix() && Kt.rows() >= 1, "scaled_dot_attention");
    check_shape<Real>(g.value(q).numel() == Kt.cols(), "scaled_dot_attention query");
    check_shape<Real>(g.value(V).same_shape(Kt), "scaled_dot_attention values");
    const Real inv_sqrt = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(Kt.cols())));
    Var logits = g.scale(g.matvec(K, q), inv_sqrt);
    Var w = g.softmax(logits);
    return {g.matvec_t(V, w), w};
}

// Temporal modulation for one head: the content weight of each neighbor is
// multiplied by a learned function of its recency, then the weight vector is
// renormalized so f stays a convex combination of the value rows.
template <typename Real>
struct TimeHeadResult {
    Var f;
    Var weights;       // renormalized
    Var content;       // pre-modulation softmax weights
    Var modulators;    // [n], all positive
};

template <typename Real>
TimeHeadResult<Real> time_head(Graph<Real>& g, Var q, Var K, Var V,
                               const std::vector<std::int64_t>& time_deltas,
                               Var Wt, Var bt, Var Walpha_raw,
                               std::int64_t* clamp_warnings = nullptr) {
    HeadResult<Real> content = scaled_dot_attention(g, q, K, V);
    check_shape<Real>(static_cast<std::int64_t>(time_deltas.size()) == g.value(K).rows(),
                      "time_head deltas");
    Var alpha = g.softplus(Walpha_raw);
    std::vector<Var> mods;
    mods.reserve(time_deltas.size());
    for (std::int64_t dt : time_deltas) {
        if (dt < 1) {
            if (clamp_warnings) ++*clamp_warnings;
            dt = 1;
        }
        const Real lg = static_cast<Real>(std::log(static_cast<double>(dt)));
        Var delta = g.sigmoid(g.add(g.affine(Wt, lg, Real(0)), bt));
        mods.push_back(g.dot(delta, alpha));
    }
    Var modulators = g.concat(mods);
    Var raw = g.mul(content.weights, modulators);
    Var w = g.normalize_sum(raw);
    return {g.matvec_t(V, w), w, content.weights, modulators};
}

// Diagnostic handles so tests can inspect every weight vector.
template <typename Real>
struct MultiHeadResult {
    Var output;                     // [d]
    std::vector<Var> head_weights;  // one [n] vector per head, post-normalization
    bool has_time_head = false;
    Var time_content = -1;
    Var time_modulators = -1;
};

// h-1 content heads plus an optional time head in the last slot; concatenated
// head outputs pass through the output projection.
template <typename Real>
MultiHeadResult<Real> multi_head(Graph<Real>& g, const AttentionVars<Real>& p,
                                 Var q, Var K, Var V,
                                 const std::vector<std::int64_t>& time_deltas,
                                 std::int64_t* clamp_warnings = nullptr) {
    check_shape<Real>(!p.heads.empty(), "multi_head");
    MultiHeadResult<Real> res;
    std::vector<Var> parts;
    parts.reserve(p.heads.size());
    for (size_t i = 0; i < p.heads.size(); ++i) {
        Var qi = g.matvec_t(p.heads[i].Wq, q);
        Var Ki = g.matmul_nn(K, p.heads[i].Wk);
        Var Vi = g.matmul_nn(V, p.heads[i].Wv);
        const bool is_time = p.time_head && i + 1 == p.heads.size();
        if (is_time) {
            TimeHeadResult<Real> th =
                time_head(g, qi, Ki, Vi, time_deltas, p.Wt, p.bt, p.Walpha, clamp_warnings);
            parts.push_back(th.f);
            res.head_weights.push_back(th.weights);
            res.has_time_head = true;
            res.time_content = th.content;
            res.time_modulators = th.modulators;
        } else {
            HeadResult<Real> hr = scaled_dot_attention(g, qi, Ki, Vi);
            parts.push_back(hr.f);
            res.head_weights.push_back(hr.weights);
        }
    }
    Var cat = parts.size() == 1 ? parts[0] : g.concat(parts);
    res.output = g.matvec_t(p.Wo, cat);
    return res;
}

template <typename Real>
struct NeighborRepr {
    Var c_neighbor;  // [d]; zero vector when absent
    bool present = false;
    MultiHeadResult<Real> detail;
};

// Collaborative representation from the k retrieved neighbor vectors, guided
// by the current session. An empty neighborhood yields an exact zero vector
// flagged absent so fusion can drop the term.
template <typename Real>
NeighborRepr<Real> neighbor_representation(Graph<Real>& g, const AttentionVars<Real>& p,
                                           Var query, const std::vector<Var>& neighbor_vecs,
                                           const std::vector<std::int64_t>& time_deltas,
                                           std::int64_t d,
                                           std::int64_t* clamp_warnings = nullptr) {
    NeighborRepr<Real> out;
    if (neighbor_vecs.empty()) {
        out.c_neighbor = g.zeros(d);
        out.present = false;
        return out;
    }
    check_shape<Real>(neighbor_vecs.size() == time_deltas.size(), "neighbor_representation");
    Var KV = g.stack_rows(neighbor_vecs);
    out.detail = multi_head(g, p, query, KV, KV, time_deltas, clamp_warnings);
    out.c_neighbor = out.detail.output;
    out.present = true;
    return out;
}

}  // namespace neta
