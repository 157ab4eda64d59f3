#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "neta/rng.hpp"
#include "neta/tensor.hpp"

namespace neta {

// Typed handle into a Graph's tape.
using Var = int;

// Eager dense-tensor computation with a recorded tape for reverse-mode
// differentiation. One Graph instance per forward pass; parameters live
// outside the graph and receive accumulated gradients in place.
template <typename Real>
class Graph {
public:
    struct Node {
        Tensor<Real> owned;
        const Tensor<Real>* external = nullptr;  // parameter values are not copied
        Tensor<Real>* external_grad = nullptr;
        Tensor<Real> grad;
        bool needs_grad = false;
        bool grad_touched = false;
        std::vector<Var> inputs;
        std::function<void(Graph&, Var)> backward;
    };

    const Tensor<Real>& value(Var id) const {
        const Node& n = nodes_[static_cast<size_t>(id)];
        return n.external ? *n.external : n.owned;
    }

    bool needs_grad(Var id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }

    // Gradient buffer for a node, zero-initialized on first touch.
    Tensor<Real>& touch_grad(Var id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        n.grad_touched = true;
        if (n.external_grad) return *n.external_grad;
        if (n.grad.data.empty()) {
            n.grad.shape = value(id).shape;
            n.grad.data.assign(static_cast<size_t>(value(id).numel()), Real(0));
        }
        return n.grad;
    }

    const Tensor<Real>& grad_of(Var id) const {
        const Node& n = nodes_[static_cast<size_t>(id)];
        return n.external_grad ? *n.external_grad : n.grad;
    }

    size_t size() const { return nodes_.size(); }

    // ---- leaves ----

    Var constant(Tensor<Real> t) {
        Node n;
        n.owned = std::move(t);
        return push(std::move(n));
    }

    Var scalar(Real v) { return constant(Tensor<Real>::scalar(v)); }

    Var zeros(std::int64_t n) { return constant(Tensor<Real>::vec(n)); }

    // Parameter leaf: reads `value` in place, accumulates into `grad` in place.
    Var param(const Tensor<Real>* value, Tensor<Real>* grad) {
        Node n;
        n.external = value;
        n.external_grad = grad;
        n.needs_grad = grad != nullptr;
        return push(std::move(n));
    }

    // ---- structural ops ----

    // Gathers rows of a [m x d] matrix; backward scatter-adds.
    Var lookup_rows(Var table, const std::vector<std::int32_t>& ids) {
        const Tensor<Real>& tab = value(table);
        check_shape<Real>(tab.is_matrix(), "lookup_rows");
        const std::int64_t d = tab.cols();
        Tensor<Real> out = Tensor<Real>::mat(static_cast<std::int64_t>(ids.size()), d);
        for (size_t r = 0; r < ids.size(); ++r) {
            if (ids[r] < 0 || ids[r] >= tab.rows())
                throw InvalidArgument("lookup_rows: item id out of range");
            std::copy_n(tab.row_ptr(ids[r]), d, out.row_ptr(static_cast<std::int64_t>(r)));
        }
        return op(std::move(out), {table}, [ids](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            Tensor<Real>& gt = g.touch_grad(g.input(self, 0));
            const std::int64_t d = go.cols();
            for (size_t r = 0; r < ids.size(); ++r) {
                const Real* src = go.row_ptr(static_cast<std::int64_t>(r));
                Real* dst = gt.row_ptr(ids[r]);
                for (std::int64_t c = 0; c < d; ++c) dst[c] += src[c];
            }
        });
    }

    Var row(Var mat, std::int64_t r) {
        const Tensor<Real>& m = value(mat);
        check_shape<Real>(m.is_matrix() && r >= 0 && r < m.rows(), "row");
        Tensor<Real> out = Tensor<Real>::vec(m.cols());
        std::copy_n(m.row_ptr(r), m.cols(), out.data.data());
        return op(std::move(out), {mat}, [r](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            Tensor<Real>& gm = g.touch_grad(g.input(self, 0));
            Real* dst = gm.row_ptr(r);
            for (size_t i = 0; i < go.data.size(); ++i) dst[i] += go.data[i];
        });
    }

    Var stack_rows(const std::vector<Var>& rows) {
        check_shape<Real>(!rows.empty(), "stack_rows");
        const std::int64_t d = value(rows[0]).numel();
        Tensor<Real> out = Tensor<Real>::mat(static_cast<std::int64_t>(rows.size()), d);
        for (size_t r = 0; r < rows.size(); ++r) {
            const Tensor<Real>& v = value(rows[r]);
            check_shape<Real>(v.numel() == d, "stack_rows");
            std::copy_n(v.data.data(), d, out.row_ptr(static_cast<std::int64_t>(r)));
        }
        return op(std::move(out), rows, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            const std::int64_t d = go.cols();
            const auto& ins = g.nodes_[static_cast<size_t>(self)].inputs;
            for (size_t r = 0; r < ins.size(); ++r) {
                if (!g.needs_grad(ins[r])) continue;
                Tensor<Real>& gi = g.touch_grad(ins[r]);
                const Real* src = go.row_ptr(static_cast<std::int64_t>(r));
                for (std::int64_t c = 0; c < d; ++c) gi.data[static_cast<size_t>(c)] += src[c];
            }
        });
    }

    Var concat(const std::vector<Var>& parts) {
        check_shape<Real>(!parts.empty(), "concat");
        std::int64_t total = 0;
        for (Var p : parts) total += value(p).numel();
        Tensor<Real> out = Tensor<Real>::vec(total);
        std::int64_t at = 0;
        for (Var p : parts) {
            const Tensor<Real>& v = value(p);
            std::copy(v.data.begin(), v.data.end(), out.data.begin() + at);
            at += v.numel();
        }
        return op(std::move(out), parts, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            const auto& ins = g.nodes_[static_cast<size_t>(self)].inputs;
            std::int64_t at = 0;
            for (Var in : ins) {
                const std::int64_t n = g.value(in).numel();
                if (g.needs_grad(in)) {
                    Tensor<Real>& gi = g.touch_grad(in);
                    for (std::int64_t i = 0; i < n; ++i)
                        gi.data[static_cast<size_t>(i)] += go.data[static_cast<size_t>(at + i)];
                }
                at += n;
            }
        });
    }

    // ---- linear algebra ----

    // y = W x, W: [r x c], x: [c]
    Var matvec(Var w, Var x) {
        const Tensor<Real>& W = value(w);
        const Tensor<Real>& X = value(x);
        check_shape<Real>(W.is_matrix() && W.cols() == X.numel(), "matvec");
        Tensor<Real> out = Tensor<Real>::vec(W.rows());
        for (std::int64_t r = 0; r < W.rows(); ++r) {
            const Real* wr = W.row_ptr(r);
            double acc = 0.0;
            for (std::int64_t c = 0; c < W.cols(); ++c)
                acc += static_cast<double>(wr[c]) * static_cast<double>(X.data[static_cast<size_t>(c)]);
            out.data[static_cast<size_t>(r)] = static_cast<Real>(acc);
        }
        return op(std::move(out), {w, x}, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            Var wv = g.input(self, 0), xv = g.input(self, 1);
            const Tensor<Real>& W = g.value(wv);
            const Tensor<Real>& X = g.value(xv);
            if (g.needs_grad(wv)) {
                Tensor<Real>& gw = g.touch_grad(wv);
                for (std::int64_t r = 0; r < W.rows(); ++r) {
                    const Real gr = go.data[static_cast<size_t>(r)];
                    if (gr == Real(0)) continue;
                    Real* dst = gw.row_ptr(r);
                    for (std::int64_t c = 0; c < W.cols(); ++c)
                        dst[c] += gr * X.data[static_cast<size_t>(c)];
                }
            }
            if (g.needs_grad(xv)) {
                Tensor<Real>& gx = g.touch_grad(xv);
                for (std::int64_t r = 0; r < W.rows(); ++r) {
                    const Real gr = go.data[static_cast<size_t>(r)];
                    if (gr == Real(0)) continue;
                    const Real* wr = W.row_ptr(r);
                    for (std::int64_t c = 0; c < W.cols(); ++c)
                        gx.data[static_cast<size_t>(c)] += wr[c] * gr;
                }
            }
        });
    }

    // y = W^T x, W: [r x c], x: [r] -> [c]
    Var matvec_t(Var w, Var x) {
        const Tensor<Real>& W = value(w);
        const Tensor<Real>& X = value(x);
        check_shape<Real>(W.is_matrix() && W.rows() == X.numel(), "matvec_t");
        Tensor<Real> out = Tensor<Real>::vec(W.cols());
        std::vector<double> acc(static_cast<size_t>(W.cols()), 0.0);
        for (std::int64_t r = 0; r < W.rows(); ++r) {
            const double xr = static_cast<double>(X.data[static_cast<size_t>(r)]);
            if (xr == 0.0) continue;
            const Real* wr = W.row_ptr(r);
            for (std::int64_t c = 0; c < W.cols(); ++c)
                acc[static_cast<size_t>(c)] += static_cast<double>(wr[c]) * xr;
        }
        for (std::int64_t c = 0; c < W.cols(); ++c)
            out.data[static_cast<size_t>(c)] = static_cast<Real>(acc[static_cast<size_t>(c)]);
        return op(std::move(out), {w, x}, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            Var wv = g.input(self, 0), xv = g.input(self, 1);
            const Tensor<Real>& W = g.value(wv);
            const Tensor<Real>& X = g.value(xv);
            if (g.needs_grad(wv)) {
                Tensor<Real>& gw = g.touch_grad(wv);
                for (std::int64_t r = 0; r < W.rows(); ++r) {
                    const Real xr = X.data[static_cast<size_t>(r)];
                    if (xr == Real(0)) continue;
                    Real* dst = gw.row_ptr(r);
                    for (std::int64_t c = 0; c < W.cols(); ++c)
                        dst[c] += xr * go.data[static_cast<size_t>(c)];
                }
            }
            if (g.needs_grad(xv)) {
                Tensor<Real>& gx = g.touch_grad(xv);
                for (std::int64_t r = 0; r < W.rows(); ++r) {
                    const Real* wr = W.row_ptr(r);
                    double acc = 0.0;
                    for (std::int64_t c = 0; c < W.cols(); ++c)
                        acc += static_cast<double>(wr[c]) * static_cast<double>(go.data[static_cast<size_t>(c)]);
                    gx.data[static_cast<size_t>(r)] += static_cast<Real>(acc);
                }
            }
        });
    }

    // B = A W^T, A: [n x d], W: [k x d] -> [n x k]; projects every row of A.
    Var matmul_nt(Var a, Var w) {
        const Tensor<Real>& A = value(a);
        const Tensor<Real>& W = value(w);
        check_shape<Real>(A.is_matrix() && W.is_matrix() && A.cols() == W.cols(), "matmul_nt");
        Tensor<Real> out = Tensor<Real>::mat(A.rows(), W.rows());
        for (std::int64_t i = 0; i < A.rows(); ++i) {
            const Real* ar = A.row_ptr(i);
            Real* orow = out.row_ptr(i);
            for (std::int64_t j = 0; j < W.rows(); ++j) {
                const Real* wr = W.row_ptr(j);
                double acc = 0.0;
                for (std::int64_t c = 0; c < A.cols(); ++c)
                    acc += static_cast<double>(ar[c]) * static_cast<double>(wr[c]);
                orow[j] = static_cast<Real>(acc);
            }
        }
        return op(std::move(out), {a, w}, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            Var av = g.input(self, 0), wv = g.input(self, 1);
            const Tensor<Real>& A = g.value(av);
            const Tensor<Real>& W = g.value(wv);
            if (g.needs_grad(av)) {  // gA = gO W
                Tensor<Real>& ga = g.touch_grad(av);
                for (std::int64_t i = 0; i < A.rows(); ++i) {
                    const Real* gorow = go.row_ptr(i);
                    Real* garow = ga.row_ptr(i);
                    for (std::int64_t j = 0; j < W.rows(); ++j) {
                        const Real gij = gorow[j];
                        if (gij == Real(0)) continue;
                        const Real* wr = W.row_ptr(j);
                        for (std::int64_t c = 0; c < A.cols(); ++c) garow[c] += gij * wr[c];
                    }
                }
            }
            if (g.needs_grad(wv)) {  // gW = gO^T A
                Tensor<Real>& gw = g.touch_grad(wv);
                for (std::int64_t i = 0; i < A.rows(); ++i) {
                    const Real* gorow = go.row_ptr(i);
                    const Real* ar = A.row_ptr(i);
                    for (std::int64_t j = 0; j < W.rows(); ++j) {
                        const Real gij = gorow[j];
                        if (gij == Real(0)) continue;
                        Real* dst = gw.row_ptr(j);
                        for (std::int64_t c = 0; c < A.cols(); ++c) dst[c] += gij * ar[c];
                    }
                }
            }
        });
    }

    // B = A W, A: [n x d], W: [d x k] -> [n x k]
    Var matmul_nn(Var a, Var w) {
        const Tensor<Real>& A = value(a);
        const Tensor<Real>& W = value(w);
        check_shape<Real>(A.is_matrix() && W.is_matrix() && A.cols() == W.rows(), "matmul_nn");
        Tensor<Real> out = Tensor<Real>::mat(A.rows(), W.cols());
        for (std::int64_t i = 0; i < A.rows(); ++i) {
            const Real* ar = A.row_ptr(i);
            Real* orow = out.row_ptr(i);
            for (std::int64_t j = 0; j < W.cols(); ++j) {
                double acc = 0.0;
                for (std::int64_t c = 0; c < A.cols(); ++c)
                    acc += static_cast<double>(ar[c]) *
                           static_cast<double>(W.data[static_cast<size_t>(c * W.cols() + j)]);
                orow[j] = static_cast<Real>(acc);
            }
        }
        return op(std::move(out), {a, w}, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            Var av = g.input(self, 0), wv = g.input(self, 1);
            const Tensor<Real>& A = g.value(av);
            const Tensor<Real>& W = g.value(wv);
            if (g.needs_grad(av)) {  // gA = gO W^T
                Tensor<Real>& ga = g.touch_grad(av);
                for (std::int64_t i = 0; i < A.rows(); ++i) {
                    const Real* gorow = go.row_ptr(i);
                    Real* garow = ga.row_ptr(i);
                    for (std::int64_t j = 0; j < W.cols(); ++j) {
                        const Real gij = gorow[j];
                        if (gij == Real(0)) continue;
                        for (std::int64_t c = 0; c < A.cols(); ++c)
                            garow[c] += gij * W.data[static_cast<size_t>(c * W.cols() + j)];
                    }
                }
            }
            if (g.needs_grad(wv)) {  // gW = A^T gO
                Tensor<Real>& gw = g.touch_grad(wv);
                for (std::int64_t i = 0; i < A.rows(); ++i) {
                    const Real* gorow = go.row_ptr(i);
                    const Real* ar = A.row_ptr(i);
                    for (std::int64_t c = 0; c < A.cols(); ++c) {
                        const Real ac = ar[c];
                        if (ac == Real(0)) continue;
                        Real* dst = gw.row_ptr(c);
                        for (std::int64_t j = 0; j < W.cols(); ++j) dst[j] += ac * gorow[j];
                    }
                }
            }
        });
    }

    Var dot(Var a, Var b) {
        const Tensor<Real>& A = value(a);
        const Tensor<Real>& B = value(b);
        check_shape<Real>(A.numel() == B.numel(), "dot");
        double acc = 0.0;
        for (size_t i = 0; i < A.data.size(); ++i)
            acc += static_cast<double>(A.data[i]) * static_cast<double>(B.data[i]);
        return op(Tensor<Real>::scalar(static_cast<Real>(acc)), {a, b}, [](Graph& g, Var self) {
            const Real go = g.grad_of(self).data[0];
            Var av = g.input(self, 0), bv = g.input(self, 1);
            const Tensor<Real>& A = g.value(av);
            const Tensor<Real>& B = g.value(bv);
            if (g.needs_grad(av)) {
                Tensor<Real>& ga = g.touch_grad(av);
                for (size_t i = 0; i < A.data.size(); ++i) ga.data[i] += go * B.data[i];
            }
            if (g.needs_grad(bv)) {
                Tensor<Real>& gb = g.touch_grad(bv);
                for (size_t i = 0; i < B.data.size(); ++i) gb.data[i] += go * A.data[i];
            }
        });
    }

    // ---- elementwise ----

    Var add(Var a, Var b) {
        return binary(a, b, "add", [](Real x, Real y) { return x + y; },
                      [](Graph& g, Var self) {
                          const Tensor<Real>& go = g.grad_of(self);
                          for (int k = 0; k < 2; ++k) {
                              Var in = g.input(self, k);
                              if (!g.needs_grad(in)) continue;
                              Tensor<Real>& gi = g.touch_grad(in);
                              for (size_t i = 0; i < go.data.size(); ++i) gi.data[i] += go.data[i];
                          }
                      });
    }

    Var sub(Var a, Var b) {
        return binary(a, b, "sub", [](Real x, Real y) { return x - y; },
                      [](Graph& g, Var self) {
                          const Tensor<Real>& go = g.grad_of(self);
                          Var av = g.input(self, 0), bv = g.input(self, 1);
                          if (g.needs_grad(av)) {
                              Tensor<Real>& ga = g.touch_grad(av);
                              for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += go.data[i];
                          }
                          if (g.needs_grad(bv)) {
                              Tensor<Real>& gb = g.touch_grad(bv);
                              for (size_t i = 0; i < go.data.size(); ++i) gb.data[i] -= go.data[i];
                          }
                      });
    }

    Var mul(Var a, Var b) {
        return binary(a, b, "mul", [](Real x, Real y) { return x * y; },
                      [](Graph& g, Var self) {
                          const Tensor<Real>& go = g.grad_of(self);
                          Var av = g.input(self, 0), bv = g.input(self, 1);
                          const Tensor<Real>& A = g.value(av);
                          const Tensor<Real>& B = g.value(bv);
                          if (g.needs_grad(av)) {
                              Tensor<Real>& ga = g.touch_grad(av);
                              for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += go.data[i] * B.data[i];
                          }
                          if (g.needs_grad(bv)) {
                              Tensor<Real>& gb = g.touch_grad(bv);
                              for (size_t i = 0; i < go.data.size(); ++i) gb.data[i] += go.data[i] * A.data[i];
                          }
                      });
    }

    // a*x + b with scalar constants
    Var affine(Var x, Real a, Real b) {
        const Tensor<Real>& X = value(x);
        Tensor<Real> out = X;
        for (auto& v : out.data) v = a * v + b;
        return op(std::move(out), {x}, [a](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            Var xv = g.input(self, 0);
            if (!g.needs_grad(xv)) return;
            Tensor<Real>& gx = g.touch_grad(xv);
            for (size_t i = 0; i < go.data.size(); ++i) gx.data[i] += a * go.data[i];
        });
    }

    Var scale(Var x, Real a) { return affine(x, a, Real(0)); }

    Var sigmoid(Var x) {
        return unary(x, [](Real v) {
            const double d = static_cast<double>(v);
            return static_cast<Real>(1.0 / (1.0 + std::exp(-d)));
        }, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            const Tensor<Real>& out = g.value(self);
            Var xv = g.input(self, 0);
            if (!g.needs_grad(xv)) return;
            Tensor<Real>& gx = g.touch_grad(xv);
            for (size_t i = 0; i < go.data.size(); ++i)
                gx.data[i] += go.data[i] * out.data[i] * (Real(1) - out.data[i]);
        });
    }

    Var tanh_(Var x) {
        return unary(x, [](Real v) { return static_cast<Real>(std::tanh(static_cast<double>(v))); },
                     [](Graph& g, Var self) {
                         const Tensor<Real>& go = g.grad_of(self);
                         const Tensor<Real>& out = g.value(self);
                         Var xv = g.input(self, 0);
                         if (!g.needs_grad(xv)) return;
                         Tensor<Real>& gx = g.touch_grad(xv);
                         for (size_t i = 0; i < go.data.size(); ++i)
                             gx.data[i] += go.data[i] * (Real(1) - out.data[i] * out.data[i]);
                     });
    }

    Var softplus(Var x) {
        return unary(x, [](Real v) {
            const double d = static_cast<double>(v);
            // log1p(exp(d)) without overflow
            return static_cast<Real>(d > 30.0 ? d : std::log1p(std::exp(d)));
        }, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            const Tensor<Real>& X = g.value(g.input(self, 0));
            Var xv = g.input(self, 0);
            if (!g.needs_grad(xv)) return;
            Tensor<Real>& gx = g.touch_grad(xv);
            for (size_t i = 0; i < go.data.size(); ++i) {
                const double d = static_cast<double>(X.data[i]);
                gx.data[i] += go.data[i] * static_cast<Real>(1.0 / (1.0 + std::exp(-d)));
            }
        });
    }

    // Numerically stable softmax over a vector; rejects non-finite input.
    Var softmax(Var x) {
        const Tensor<Real>& X = value(x);
        check_shape<Real>(X.numel() >= 1, "softmax");
        if (!X.all_finite()) throw InvalidArgument("softmax: non-finite input");
        Tensor<Real> out = Tensor<Real>::vec(X.numel());
        double max_v = -std::numeric_limits<double>::infinity();
        for (Real v : X.data) max_v = std::max(max_v, static_cast<double>(v));
        double sum = 0.0;
        for (size_t i = 0; i < X.data.size(); ++i) {
            const double e = std::exp(static_cast<double>(X.data[i]) - max_v);
            out.data[i] = static_cast<Real>(e);
            sum += e;
        }
        for (auto& v : out.data) v = static_cast<Real>(static_cast<double>(v) / sum);
        return op(std::move(out), {x}, [](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            const Tensor<Real>& s = g.value(self);
            Var xv = g.input(self, 0);
            if (!g.needs_grad(xv)) return;
            Tensor<Real>& gx = g.touch_grad(xv);
            double inner = 0.0;
            for (size_t i = 0; i < s.data.size(); ++i)
                inner += static_cast<double>(go.data[i]) * static_cast<double>(s.data[i]);
            for (size_t i = 0; i < s.data.size(); ++i)
                gx.data[i] += s.data[i] * static_cast<Real>(static_cast<double>(go.data[i]) - inner);
        });
    }

    // x / sum(x); keeps a weight vector convex after modulation.
    Var normalize_sum(Var x) {
        const Tensor<Real>& X = value(x);
        double sum = 0.0;
        for (Real v : X.data) sum += static_cast<double>(v);
        if (sum == 0.0 || !std::isfinite(sum))
            throw InvalidArgument("normalize_sum: zero or non-finite total");
        Tensor<Real> out = Tensor<Real>::vec(X.numel());
        for (size_t i = 0; i < X.data.size(); ++i)
            out.data[i] = static_cast<Real>(static_cast<double>(X.data[i]) / sum);
        return op(std::move(out), {x}, [sum](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            const Tensor<Real>& out = g.value(self);
            Var xv = g.input(self, 0);
            if (!g.needs_grad(xv)) return;
            Tensor<Real>& gx = g.touch_grad(xv);
            double inner = 0.0;
            for (size_t i = 0; i < out.data.size(); ++i)
                inner += static_cast<double>(go.data[i]) * static_cast<double>(out.data[i]);
            for (size_t i = 0; i < out.data.size(); ++i)
                gx.data[i] += static_cast<Real>((static_cast<double>(go.data[i]) - inner) / sum);
        });
    }

    Var sum(Var x) {
        const Tensor<Real>& X = value(x);
        double acc = 0.0;
        for (Real v : X.data) acc += static_cast<double>(v);
        return op(Tensor<Real>::scalar(static_cast<Real>(acc)), {x}, [](Graph& g, Var self) {
            const Real go = g.grad_of(self).data[0];
            Var xv = g.input(self, 0);
            if (!g.needs_grad(xv)) return;
            Tensor<Real>& gx = g.touch_grad(xv);
            for (auto& v : gx.data) v += go;
        });
    }

    // Column mean of a [n x d] matrix -> [d]
    Var mean_rows(Var m) {
        const Tensor<Real>& M = value(m);
        check_shape<Real>(M.is_matrix() && M.rows() >= 1, "mean_rows");
        const Real inv = Real(1) / static_cast<Real>(M.rows());
        Tensor<Real> out = Tensor<Real>::vec(M.cols());
        std::vector<double> acc(static_cast<size_t>(M.cols()), 0.0);
        for (std::int64_t r = 0; r < M.rows(); ++r) {
            const Real* src = M.row_ptr(r);
            for (std::int64_t c = 0; c < M.cols(); ++c) acc[static_cast<size_t>(c)] += static_cast<double>(src[c]);
        }
        for (std::int64_t c = 0; c < M.cols(); ++c)
            out.data[static_cast<size_t>(c)] = static_cast<Real>(acc[static_cast<size_t>(c)] * static_cast<double>(inv));
        return op(std::move(out), {m}, [inv](Graph& g, Var self) {
            const Tensor<Real>& go = g.grad_of(self);
            Var mv = g.input(self, 0);
            if (!g.needs_grad(mv)) return;
            Tensor<Real>& gm = g.touch_grad(mv);
            for (std::int64_t r = 0; r < gm.rows(); ++r) {
                Real* dst = gm.row_ptr(r);
                for (std::int64_t c = 0; c < gm.cols(); ++c)
                    dst[c] += go.data[static_cast<size_t>(c)] * inv;
            }
        });
    }

    // Inverted dropout: zero with probability `rate`, scale survivors by
    // 1/(1-rate). Identity when not training or rate is zero.
    Var dropout(Var x, double rate, bool training, Rng& rng) {
        if (rate < 0.0 || rate >= 1.0) throw InvalidArgument("dropout rate must be in [0,1)");
        if (!training || rate == 0.0) return x;
        const Tensor<Real>& X = value(x);
        Tensor<Real> mask;
        mask.shape = X.shape;
        mask.data.resize(X.data.size());
        const Real keep_scale = static_cast<Real>(1.0 / (1.0 - rate));
        for (auto& v : mask.data) v = rng.uniform01() < rate ? Real(0) : keep_scale;
        Var m = constant(std::move(mask));
        return mul(x, m);
    }

    // ---- losses ----

    // -log(p[target]) with probabilities clamped to [eps, 1-eps].
    Var nll_loss(Var probs, std::int32_t target, double eps = 1e-7) {
        const Tensor<Real>& P = value(probs);
        check_shape<Real>(target >= 0 && target < P.numel(), "nll_loss target");
        const double p = clamp_prob(static_cast<double>(P.data[static_cast<size_t>(target)]), eps);
        Tensor<Real> out = Tensor<Real>::scalar(static_cast<Real>(-std::log(p)));
        return op(std::move(out), {probs}, [target, eps](Graph& g, Var self) {
            const Real go = g.grad_of(self).data[0];
            Var pv = g.input(self, 0);
            if (!g.needs_grad(pv)) return;
            const Tensor<Real>& P = g.value(pv);
            Tensor<Real>& gp = g.touch_grad(pv);
            const double p = clamp_prob(static_cast<double>(P.data[static_cast<size_t>(target)]), eps);
            gp.data[static_cast<size_t>(target)] += static_cast<Real>(-1.0 / p) * go;
        });
    }

    // -log(p[target]) - sum_{i != target} log(1 - p[i]), clamped as above.
    Var bce_loss(Var probs, std::int32_t target, double eps = 1e-7) {
        const Tensor<Real>& P = value(probs);
        check_shape<Real>(target >= 0 && target < P.numel(), "bce_loss target");
        double loss = 0.0;
        for (std::int64_t i = 0; i < P.numel(); ++i) {
            const double p = clamp_prob(static_cast<double>(P.data[static_cast<size_t>(i)]), eps);
            loss -= (i == target) ? std::log(p) : std::log(1.0 - p);
        }
        Tensor<Real> out = Tensor<Real>::scalar(static_cast<Real>(loss));
        return op(std::move(out), {probs}, [target, eps](Graph& g, Var self) {
            const Real go = g.grad_of(self).data[0];
            Var pv = g.input(self, 0);
            if (!g.needs_grad(pv)) return;
            const Tensor<Real>& P = g.value(pv);
            Tensor<Real>& gp = g.touch_grad(pv);
            for (std::int64_t i = 0; i < P.numel(); ++i) {
                const double p = clamp_prob(static_cast<double>(P.data[static_cast<size_t>(i)]), eps);
                const double d = (i == static_cast<std::int64_t>(target)) ? -1.0 / p : 1.0 / (1.0 - p);
                gp.data[static_cast<size_t>(i)] += static_cast<Real>(d) * go;
            }
        });
    }

    // Reverse-mode accumulation from a scalar loss node.
    void backward(Var loss) {
        if (value(loss).numel() != 1)
            throw InvalidArgument("backward requires a scalar loss");
        touch_grad(loss).data[0] = Real(1);
        for (Var id = loss; id >= 0; --id) {
            Node& n = nodes_[static_cast<size_t>(id)];
            if (!n.grad_touched || !n.backward) continue;
            n.backward(*this, id);
        }
    }

    Var input(Var self, size_t k) const { return nodes_[static_cast<size_t>(self)].inputs[k]; }

private:
    static double clamp_prob(double p, double eps) {
        return std::min(std::max(p, eps), 1.0 - eps);
    }

    Var push(Node n) {
        nodes_.push_back(std::move(n));
        return static_cast<Var>(nodes_.size() - 1);
    }

    Var op(Tensor<Real> out, std::vector<Var> inputs, std::function<void(Graph&, Var)> bw) {
        Node n;
        n.owned = std::move(out);
        n.inputs = std::move(inputs);
        for (Var in : n.inputs) {
            if (nodes_[static_cast<size_t>(in)].needs_grad) {
                n.needs_grad = true;
                break;
            }
        }
        if (n.needs_grad) n.backward = std::move(bw);
        return push(std::move(n));
    }

    template <typename F, typename B>
    Var unary(Var x, F f, B bw) {
        const Tensor<Real>& X = value(x);
        Tensor<Real> out;
        out.shape = X.shape;
        out.data.resize(X.data.size());
        for (size_t i = 0; i < X.data.size(); ++i) out.data[i] = f(X.data[i]);
        return op(std::move(out), {x}, bw);
    }

    template <typename F, typename B>
    Var binary(Var a, Var b, const char* what, F f, B bw) {
        const Tensor<Real>& A = value(a);
        const Tensor<Real>& B_ = value(b);
        check_shape<Real>(A.numel() == B_.numel(), what);
        Tensor<Real> out;
        out.shape = A.shape;
        out.data.resize(A.data.size());
        for (size_t i = 0; i < A.data.size(); ++i) out.data[i] = f(A.data[i], B_.data[i]);
        return op(std::move(out), {a, b}, bw);
    }

    std::vector<Node> nodes_;
};

// The nine GRU parameter handles for one cell.
template <typename Real>
struct GruVars {
    Var Wz, Uz, bz;
    Var Wr, Ur, br;
    Var Wh, Uh, bh;
};

// Standard GRU step:
//   z = sigm(Wz x + Uz h + bz), r = sigm(Wr x + Ur h + br)
//   hc = tanh(Wh x + Uh (r*h) + bh), h' = (1-z)*h + z*hc
template <typename Real>
Var gru_cell(Graph<Real>& g, const GruVars<Real>& p, Var x, Var h_prev) {
    Var z = g.sigmoid(g.add(g.add(g.matvec(p.Wz, x), g.matvec(p.Uz, h_prev)), p.bz));
    Var r = g.sigmoid(g.add(g.add(g.matvec(p.Wr, x), g.matvec(p.Ur, h_prev)), p.br));
    Var hc = g.tanh_(g.add(g.add(g.matvec(p.Wh, x), g.matvec(p.Uh, g.mul(r, h_prev))), p.bh));
    return g.add(g.mul(g.affine(z, Real(-1), Real(1)), h_prev), g.mul(z, hc));
}

}  // namespace neta
