#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "neta/attention.hpp"
#include "neta/encoders.hpp"
#include "neta/graph.hpp"
#include "neta/params.hpp"
#include "neta/types.hpp"

namespace neta {

enum class LossKind { Bernoulli, Categorical };

inline const char* loss_name(LossKind k) {
    return k == LossKind::Bernoulli ? "bernoulli" : "categorical";
}

struct ModelConfig {
    EncoderKind encoder = EncoderKind::Narm;
    std::int32_t dim = 100;
    std::int32_t heads = 4;
    std::int32_t neighbors = 40;
    std::int32_t vocab = 0;
    bool time_head = true;
    std::int32_t time_dim = 8;
    LossKind loss = LossKind::Bernoulli;
    std::int32_t max_session_len = 20;

    void validate() const {
        if (dim <= 0) throw InvalidArgument("dim must be positive");
        if (heads <= 0 || dim % heads != 0)
            throw InvalidArgument("heads must be positive and divide dim");
        if (vocab <= 0) throw InvalidArgument("vocab must be positive");
        if (time_dim < 1) throw InvalidArgument("time_dim must be >= 1");
        if (neighbors < 0) throw InvalidArgument("neighbors must be >= 0");
        if (max_session_len < 1) throw InvalidArgument("max_session_len must be >= 1");
    }
};

inline std::vector<ItemId> truncate_recent(const std::vector<ItemId>& items, std::int32_t max_len) {
    if (static_cast<std::int64_t>(items.size()) <= max_len) return items;
    return std::vector<ItemId>(items.end() - max_len, items.end());
}

// All trainable state plus the configuration that shaped it.
template <typename Real>
class Model {
public:
    ModelConfig cfg;
    ParameterStore<Real> params;

    Model(ModelConfig c, std::uint64_t seed) : cfg(c) {
        cfg.validate();
        Rng rng(seed);
        const std::int64_t d = cfg.dim;
        const std::int64_t dh = d / cfg.heads;
        params.add_mat("embeddings", cfg.vocab, d, rng);
        if (cfg.encoder == EncoderKind::Narm) {
            for (const char* n : {"narm.gru.Wz", "narm.gru.Wr", "narm.gru.Wh",
                                  "narm.gru.Uz", "narm.gru.Ur", "narm.gru.Uh"})
                params.add_mat(n, d, d, rng);
            for (const char* n : {"narm.gru.bz", "narm.gru.br", "narm.gru.bh"})
                params.add_bias(n, d);
            params.add_mat("narm.attn.A1", d, d, rng);
            params.add_mat("narm.attn.A2", d, d, rng);
            params.add_vec("narm.attn.u", d, d, rng);
        } else {
            params.add_mat("stamp.attn.W1", d, d, rng);
            params.add_mat("stamp.attn.W2", d, d, rng);
            params.add_mat("stamp.attn.W3", d, d, rng);
            params.add_bias("stamp.attn.b", d);
            params.add_vec("stamp.attn.w0", d, d, rng);
            params.add_mat("stamp.long.W", d, d, rng);
            params.add_bias("stamp.long.b", d);
            params.add_mat("stamp.short.W", d, d, rng);
            params.add_bias("stamp.short.b", d);
        }
        const Real proj_bound = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(d)));
        for (std::int32_t h = 0; h < cfg.heads; ++h) {
            const std::string base = "nat.head" + std::to_string(h) + ".";
            params.add(base + "Wq", {d, dh}, proj_bound, &rng);
            params.add(base + "Wk", {d, dh}, proj_bound, &rng);
            params.add(base + "Wv", {d, dh}, proj_bound, &rng);
        }
        params.add("nat.Wo", {cfg.heads * dh, d},
                   static_cast<Real>(1.0 / std::sqrt(static_cast<double>(cfg.heads * dh))), &rng);
        if (cfg.time_head) {
            params.add("nat.time.Wt", {cfg.time_dim}, Real(1), &rng);
            params.add_bias("nat.time.b", cfg.time_dim);
            // raw value chosen so softplus(raw) = 1/time_dim, a unit-scale
            // positive modulator at initialization
            auto& wa = params.add_bias("nat.time.Walpha", cfg.time_dim);
            const double target = 1.0 / static_cast<double>(cfg.time_dim);
            wa.value.fill(static_cast<Real>(std::log(std::expm1(target))));
        }
        params.add("fuse.Wlg", {2 * d, d},
                   static_cast<Real>(1.0 / std::sqrt(static_cast<double>(2 * d))), &rng);
        params.add_mat("fuse.Wn", d, d, rng);
        params.add_mat("fuse.Wal", d, d, rng);
        params.add_mat("fuse.Wag", d, d, rng);
        params.add_mat("fuse.Wan", d, d, rng);
        params.add_bias("fuse.b", d);
    }
};

template <typename Real>
struct FuseVars {
    Var Wlg, Wn, Wal, Wag, Wan, b;
};

// Every parameter bound as a graph leaf. Rebuilt per forward pass.
template <typename Real>
struct BoundModel {
    Var emb = -1;
    NarmVars<Real> narm{};
    StampVars<Real> stamp{};
    AttentionVars<Real> attn{};
    FuseVars<Real> fuse{};
};

template <typename Real>
BoundModel<Real> bind_model(Model<Real>& m, Graph<Real>& g, bool with_grad) {
    auto bindp = [&](const char* name) {
        Parameter<Real>& p = m.params.get(name);
        return g.param(&p.value, with_grad ? &p.grad : nullptr);
    };
    BoundModel<Real> b;
    b.emb = bindp("embeddings");
    if (m.cfg.encoder == EncoderKind::Narm) {
        b.narm.gru.Wz = bindp("narm.gru.Wz");
        b.narm.gru.Wr = bindp("narm.gru.Wr");
        b.narm.gru.Wh = bindp("narm.gru.Wh");
        b.narm.gru.Uz = bindp("narm.gru.Uz");
        b.narm.gru.Ur = bindp("narm.gru.Ur");
        b.narm.gru.Uh = bindp("narm.gru.Uh");
        b.narm.gru.bz = bindp("narm.gru.bz");
        b.narm.gru.br = bindp("narm.gru.br");
        b.narm.gru.bh = bindp("narm.gru.bh");
        b.narm.A1 = bindp("narm.attn.A1");
        b.narm.A2 = bindp("narm.attn.A2");
        b.narm.u = bindp("narm.attn.u");
    } else {
        b.stamp.W1 = bindp("stamp.attn.W1");
        b.stamp.W2 = bindp("stamp.attn.W2");
        b.stamp.W3 = bindp("stamp.attn.W3");
        b.stamp.ba = bindp("stamp.attn.b");
        b.stamp.w0 = bindp("stamp.attn.w0");
        b.stamp.Wl = bindp("stamp.long.W");
        b.stamp.bl = bindp("stamp.long.b");
        b.stamp.Ws = bindp("stamp.short.W");
        b.stamp.bs = bindp("stamp.short.b");
    }
    b.attn.heads.resize(static_cast<size_t>(m.cfg.heads));
    for (std::int32_t h = 0; h < m.cfg.heads; ++h) {
        const std::string base = "nat.head" + std::to_string(h) + ".";
        b.attn.heads[static_cast<size_t>(h)].Wq = bindp((base + "Wq").c_str());
        b.attn.heads[static_cast<size_t>(h)].Wk = bindp((base + "Wk").c_str());
        b.attn.heads[static_cast<size_t>(h)].Wv = bindp((base + "Wv").c_str());
    }
    b.attn.Wo = bindp("nat.Wo");
    b.attn.time_head = m.cfg.time_head;
    if (m.cfg.time_head) {
        b.attn.Wt = bindp("nat.time.Wt");
        b.attn.bt = bindp("nat.time.b");
        b.attn.Walpha = bindp("nat.time.Walpha");
    }
    b.fuse.Wlg = bindp("fuse.Wlg");
    b.fuse.Wn = bindp("fuse.Wn");
    b.fuse.Wal = bindp("fuse.Wal");
    b.fuse.Wag = bindp("fuse.Wag");
    b.fuse.Wan = bindp("fuse.Wan");
    b.fuse.b = bindp("fuse.b");
    return b;
}

template <typename Real>
struct FuseResult {
    Var c_t;
    Var gate = -1;  // unset when the neighbor term is dropped
};

// c_t = [c_sec, c_pri] Wlg + gate * (c_nei Wn), gate = sigmoid of a
// trilinear combination. Absent neighbors contribute exactly nothing.
template <typename Real>
FuseResult<Real> fuse(Graph<Real>& g, const FuseVars<Real>& p, Var c_sec, Var c_pri,
                      Var c_nei, bool neighbor_present) {
    Var base = g.matvec_t(p.Wlg, g.concat({c_sec, c_pri}));
    if (!neighbor_present) return {base, -1};
    Var gate = g.sigmoid(g.add(g.add(g.matvec(p.Wal, c_sec), g.matvec(p.Wag, c_pri)),
                               g.add(g.matvec(p.Wan, c_nei), p.b)));
    return {g.add(base, g.mul(gate, g.matvec_t(p.Wn, c_nei))), gate};
}

template <typename Real>
struct Prediction {
    Var scores;  // [m]
    Var yhat;    // [m], softmax of scores
};

template <typename Real>
Prediction<Real> score_items(Graph<Real>& g, Var emb, Var c_t) {
    Var z = g.matvec(emb, c_t);
    return {z, g.softmax(z)};
}

constexpr double kProbEps = 1e-7;

template <typename Real>
Var prediction_loss(Graph<Real>& g, Var yhat, ItemId target, LossKind kind) {
    return kind == LossKind::Bernoulli ? g.bce_loss(yhat, target, kProbEps)
                                   : g.nll_loss(yhat, target, kProbEps);
}

// One neighbor session as the forward pass consumes it.
struct NeighborInput {
    std::vector<ItemId> items;
    std::int64_t time_delta = 1;
};

template <typename Real>
struct ForwardDetail {
    Var scores = -1;
    Var yhat = -1;
    Var loss = -1;
    SessionRepr<Real> current{};
    NeighborRepr<Real> nrep{};
    FuseResult<Real> fused{};
};

// Full pipeline for one example: encode prefix, encode neighbors, guided
// attention, gated fusion, score everything. label < 0 skips the loss node.
template <typename Real>
ForwardDetail<Real> model_forward(Model<Real>& m, Graph<Real>& g, const BoundModel<Real>& b,
                                  const std::vector<ItemId>& prefix, ItemId label,
                                  const std::vector<NeighborInput>& neighbors,
                                  bool training, Rng* rng,
                                  std::int64_t* clamp_warnings = nullptr) {
    if (prefix.empty()) throw InvalidArgument("model_forward: empty prefix");
    if (training && !rng) throw InvalidArgument("model_forward: training needs an rng");
    auto embed = [&](const std::vector<ItemId>& items) {
        Var rows = g.lookup_rows(b.emb, truncate_recent(items, m.cfg.max_session_len));
        if (training) rows = g.dropout(rows, 0.25, true, *rng);
        return rows;
    };
    auto encode = [&](Var rows) {
        return m.cfg.encoder == EncoderKind::Narm ? encode_narm(g, b.narm, rows)
                                                  : encode_stamp(g, b.stamp, rows);
    };
    ForwardDetail<Real> out;
    out.current = encode(embed(prefix));
    std::vector<Var> nvecs;
    std::vector<std::int64_t> deltas;
    nvecs.reserve(neighbors.size());
    deltas.reserve(neighbors.size());
    for (const NeighborInput& n : neighbors) {
        nvecs.push_back(encode(embed(n.items)).primary);
        deltas.push_back(n.time_delta);
    }
    Var query = m.cfg.encoder == EncoderKind::Narm ? out.current.secondary : out.current.primary;
    out.nrep = neighbor_representation(g, b.attn, query, nvecs, deltas, m.cfg.dim,
                                       clamp_warnings);
    out.fused = fuse(g, b.fuse, out.current.secondary, out.current.primary,
                     out.nrep.c_neighbor, out.nrep.present);
    Var c_t = out.fused.c_t;
    if (training) c_t = g.dropout(c_t, 0.50, true, *rng);
    Prediction<Real> pred = score_items(g, b.emb, c_t);
    out.scores = pred.scores;
    out.yhat = pred.yhat;
    if (label >= 0) out.loss = prediction_loss(g, pred.yhat, label, m.cfg.loss);
    return out;
}

// ---- checkpoint serialization ----

inline constexpr const char* kCheckpointMagic = "NETA-CKPT-v1";

template <typename Real>
void save_checkpoint(const Model<Real>& m, const std::string& path) {
    static_assert(sizeof(float) == 4, "32-bit float payload");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << kCheckpointMagic << "\n";
    out << "encoder " << encoder_name(m.cfg.encoder) << "\n";
    out << "dim " << m.cfg.dim << "\n";
    out << "heads " << m.cfg.heads << "\n";
    out << "neighbors " << m.cfg.neighbors << "\n";
    out << "vocab " << m.cfg.vocab << "\n";
    out << "time_head " << (m.cfg.time_head ? 1 : 0) << "\n";
    out << "time_dim " << m.cfg.time_dim << "\n";
    out << "loss " << loss_name(m.cfg.loss) << "\n";
    out << "max_session_len " << m.cfg.max_session_len << "\n";
    auto params = m.params.all();
    out << "tensors " << params.size() << "\n";
    for (const Parameter<Real>* p : params) {
        const std::uint32_t name_len = static_cast<std::uint32_t>(p->name.size());
        out.write(reinterpret_cast<const char*>(&name_len), 4);
        out.write(p->name.data(), name_len);
        const std::uint32_t rank = static_cast<std::uint32_t>(p->value.shape.size());
        out.write(reinterpret_cast<const char*>(&rank), 4);
        for (std::int64_t s : p->value.shape) {
            const std::uint32_t dim = static_cast<std::uint32_t>(s);
            out.write(reinterpret_cast<const char*>(&dim), 4);
        }
        for (Real v : p->value.data) {
            const float f = static_cast<float>(v);
            out.write(reinterpret_cast<const char*>(&f), 4);
        }
    }
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

template <typename Real>
Model<Real> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCheckpointMagic)
        throw DataError("not a model checkpoint: " + path);
    ModelConfig cfg;
    std::int64_t tensor_count = -1;
    while (std::getline(in, line)) {
        const size_t sp = line.find(' ');
        if (sp == std::string::npos) throw DataError("malformed checkpoint header line: " + line);
        const std::string key = line.substr(0, sp);
        const std::string val = line.substr(sp + 1);
        if (key == "encoder") {
            if (val == "narm") cfg.encoder = EncoderKind::Narm;
            else if (val == "stamp") cfg.encoder = EncoderKind::Stamp;
            else throw DataError("unknown encoder in checkpoint: " + val);
        } else if (key == "dim") cfg.dim = std::stoi(val);
        else if (key == "heads") cfg.heads = std::stoi(val);
        else if (key == "neighbors") cfg.neighbors = std::stoi(val);
        else if (key == "vocab") cfg.vocab = std::stoi(val);
        else if (key == "time_head") cfg.time_head = std::stoi(val) != 0;
        else if (key == "time_dim") cfg.time_dim = std::stoi(val);
        else if (key == "loss") {
            if (val == "bernoulli") cfg.loss = LossKind::Bernoulli;
            else if (val == "categorical") cfg.loss = LossKind::Categorical;
            else throw DataError("unknown loss in checkpoint: " + val);
        } else if (key == "max_session_len") cfg.max_session_len = std::stoi(val);
        else if (key == "tensors") {
            tensor_count = std::stoll(val);
            break;
        } else throw DataError("unknown checkpoint header key: " + key);
    }
    if (tensor_count < 0) throw DataError("checkpoint missing tensor table: " + path);
    Model<Real> m(cfg, 0);
    if (tensor_count != static_cast<std::int64_t>(m.params.count()))
        throw DataError("checkpoint tensor count does not match configuration");
    for (std::int64_t t = 0; t < tensor_count; ++t) {
        std::uint32_t name_len = 0;
        if (!in.read(reinterpret_cast<char*>(&name_len), 4) || name_len > 4096)
            throw DataError("corrupt checkpoint tensor header");
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw DataError("corrupt checkpoint tensor name");
        if (!m.params.has(name)) throw DataError("unexpected tensor in checkpoint: " + name);
        Parameter<Real>& p = m.params.get(name);
        std::uint32_t rank = 0;
        if (!in.read(reinterpret_cast<char*>(&rank), 4) ||
            rank != p.value.shape.size())
            throw DataError("tensor rank mismatch: " + name);
        std::int64_t numel = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            std::uint32_t dim = 0;
            if (!in.read(reinterpret_cast<char*>(&dim), 4))
                throw DataError("corrupt tensor shape: " + name);
            if (static_cast<std::int64_t>(dim) != p.value.shape[r])
                throw DataError("tensor shape mismatch: " + name);
            numel *= dim;
        }
        for (std::int64_t i = 0; i < numel; ++i) {
            float f = 0;
            if (!in.read(reinterpret_cast<char*>(&f), 4))
                throw DataError("truncated tensor payload: " + name);
            p.value.data[static_cast<size_t>(i)] = static_cast<Real>(f);
        }
    }
    return m;
}

}  // namespace neta
