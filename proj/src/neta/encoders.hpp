#pragma once

#include <vector>

#include "neta/graph.hpp"

namespace neta {

enum class EncoderKind { Narm, Stamp };

inline const char* encoder_name(EncoderKind k) {
    return k == EncoderKind::Narm ? "narm" : "stamp";
}

// primary: sequential-behavior summary (also used as a neighbor's key/value
// vector); secondary: the complementary purpose vector.
template <typename Real>
struct SessionRepr {
    Var primary = -1;
    Var secondary = -1;
    Var hidden = -1;        // [t x d] states (GRU outputs or raw embeddings)
    Var attn_weights = -1;  // [t]
};

template <typename Real>
struct NarmVars {
    GruVars<Real> gru;
    Var A1, A2, u;
};

template <typename Real>
struct StampVars {
    Var W1, W2, W3, ba, w0;
    Var Wl, bl;  // long-term fc
    Var Ws, bs;  // short-term fc
};

// Attention pooling over GRU states with the last state as anchor:
// alpha_j ~ softmax_j(u . sigmoid(A1 h_t + A2 h_j)); returns sum_j alpha_j h_j.
template <typename Real>
std::pair<Var, Var> narm_attention(Graph<Real>& g, const NarmVars<Real>& p,
                                   const std::vector<Var>& states) {
    Var anchor = g.matvec(p.A1, states.back());
    std::vector<Var> logits;
    logits.reserve(states.size());
    for (Var h : states)
        logits.push_back(g.dot(p.u, g.sigmoid(g.add(anchor, g.matvec(p.A2, h)))));
    Var alpha = g.softmax(g.concat(logits));
    Var H = g.stack_rows(states);
    return {g.matvec_t(H, alpha), alpha};
}

// GRU left-to-right over the embedded session; primary = last state,
// secondary = attention-pooled states.
template <typename Real>
SessionRepr<Real> encode_narm(Graph<Real>& g, const NarmVars<Real>& p, Var emb_rows) {
    const auto& X = g.value(emb_rows);
    check_shape<Real>(X.is_matrix() && X.rows() >= 1, "encode_narm");
    const std::int64_t t = X.rows();
    const std::int64_t d = X.cols();
    Var h = g.zeros(d);
    std::vector<Var> states;
    states.reserve(static_cast<size_t>(t));
    for (std::int64_t j = 0; j < t; ++j) {
        h = gru_cell(g, p.gru, g.row(emb_rows, j), h);
        states.push_back(h);
    }
    SessionRepr<Real> out;
    out.primary = states.back();
    auto [pooled, alpha] = narm_attention(g, p, states);
    out.secondary = pooled;
    out.attn_weights = alpha;
    out.hidden = g.stack_rows(states);
    return out;
}

// Trilinear attention over raw embeddings anchored on the last click and the
// session mean; attended sum and last click each pass through their own tanh
// layer. primary = long-term interest, secondary = short-term.
template <typename Real>
SessionRepr<Real> encode_stamp(Graph<Real>& g, const StampVars<Real>& p, Var emb_rows) {
    const auto& X = g.value(emb_rows);
    check_shape<Real>(X.is_matrix() && X.rows() >= 1, "encode_stamp");
    const std::int64_t t = X.rows();
    Var x_last = g.row(emb_rows, t - 1);
    Var m_s = g.mean_rows(emb_rows);
    Var anchor = g.add(g.matvec(p.W2, x_last), g.add(g.matvec(p.W3, m_s), p.ba));
    std::vector<Var> logits;
    logits.reserve(static_cast<size_t>(t));
    for (std::int64_t i = 0; i < t; ++i)
        logits.push_back(g.dot(p.w0, g.sigmoid(g.add(g.matvec(p.W1, g.row(emb_rows, i)), anchor))));
    Var w = g.softmax(g.concat(logits));
    Var m_a = g.matvec_t(emb_rows, w);
    SessionRepr<Real> out;
    out.primary = g.tanh_(g.add(g.matvec(p.Wl, m_a), p.bl));
    out.secondary = g.tanh_(g.add(g.matvec(p.Ws, x_last), p.bs));
    out.attn_weights = w;
    out.hidden = emb_rows;
    return out;
}

}  // namespace neta
