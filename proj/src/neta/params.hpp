#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "neta/error.hpp"
#include "neta/rng.hpp"
#include "neta/tensor.hpp"

namespace neta {

template <typename Real>
struct Parameter {
    std::string name;
    Tensor<Real> value;
    Tensor<Real> grad;
    Tensor<Real> adam_m;
    Tensor<Real> adam_v;
};

// Named trainable tensors with persistent gradient and optimizer state.
// Pointers stay stable after insertion; iteration order is insertion order,
// which keeps updates and serialization deterministic.
template <typename Real>
class ParameterStore {
public:
    Parameter<Real>& add(const std::string& name, std::vector<std::int64_t> shape,
                         Real init_bound, Rng* rng) {
        if (by_name_.count(name)) throw InvalidArgument("duplicate parameter: " + name);
        auto p = std::make_unique<Parameter<Real>>();
        p->name = name;
        p->value.shape = shape;
        std::int64_t n = 1;
        for (auto s : shape) n *= s;
        p->value.data.resize(static_cast<size_t>(n));
        if (init_bound > Real(0) && rng)
            for (auto& v : p->value.data)
                v = static_cast<Real>(rng->uniform(-static_cast<double>(init_bound),
                                                   static_cast<double>(init_bound)));
        p->grad = p->value;
        p->grad.fill(Real(0));
        p->adam_m = p->grad;
        p->adam_v = p->grad;
        Parameter<Real>* raw = p.get();
        params_.push_back(std::move(p));
        by_name_[name] = raw;
        return *raw;
    }

    Parameter<Real>& add_mat(const std::string& name, std::int64_t r, std::int64_t c, Rng& rng) {
        const Real bound = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(c)));
        return add(name, {r, c}, bound, &rng);
    }

    // fan_in given explicitly; used when the multiplying dimension is not the
    // column count (vectors applied by dot product).
    Parameter<Real>& add_vec(const std::string& name, std::int64_t n, std::int64_t fan_in, Rng& rng) {
        const Real bound = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(fan_in)));
        return add(name, {n}, bound, &rng);
    }

    Parameter<Real>& add_bias(const std::string& name, std::int64_t n) {
        return add(name, {n}, Real(0), nullptr);
    }

    Parameter<Real>& get(const std::string& name) {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw InvalidArgument("unknown parameter: " + name);
        return *it->second;
    }

    const Parameter<Real>& get(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw InvalidArgument("unknown parameter: " + name);
        return *it->second;
    }

    bool has(const std::string& name) const { return by_name_.count(name) != 0; }

    std::vector<Parameter<Real>*> all() {
        std::vector<Parameter<Real>*> out;
        out.reserve(params_.size());
        for (auto& p : params_) out.push_back(p.get());
        return out;
    }

    std::vector<const Parameter<Real>*> all() const {
        std::vector<const Parameter<Real>*> out;
        out.reserve(params_.size());
        for (auto& p : params_) out.push_back(p.get());
        return out;
    }

    size_t count() const { return params_.size(); }

    std::int64_t total_values() const {
        std::int64_t n = 0;
        for (auto& p : params_) n += p->value.numel();
        return n;
    }

    void zero_grads() {
        for (auto& p : params_) p->grad.fill(Real(0));
    }

    void scale_grads(double s) {
        for (auto& p : params_)
            for (auto& v : p->grad.data) v = static_cast<Real>(static_cast<double>(v) * s);
    }

    double grad_norm() const {
        double sq = 0.0;
        for (auto& p : params_)
            for (Real v : p->grad.data) sq += static_cast<double>(v) * static_cast<double>(v);
        return std::sqrt(sq);
    }

    // Global-norm clipping; no-op when the norm is under the cap.
    double clip_grads(double max_norm) {
        const double norm = grad_norm();
        if (norm > max_norm && norm > 0.0) scale_grads(max_norm / norm);
        return norm;
    }

    bool grads_finite() const {
        for (auto& p : params_)
            if (!p->grad.all_finite()) return false;
        return true;
    }

    bool values_finite() const {
        for (auto& p : params_)
            if (!p->value.all_finite()) return false;
        return true;
    }

    // One Adam update over every parameter. `t` is the 1-based step count.
    void adam_step(double lr, double beta1, double beta2, double eps, std::int64_t t) {
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (auto& p : params_) {
            for (size_t i = 0; i < p->value.data.size(); ++i) {
                const double gi = static_cast<double>(p->grad.data[i]);
                double m = beta1 * static_cast<double>(p->adam_m.data[i]) + (1.0 - beta1) * gi;
                double v = beta2 * static_cast<double>(p->adam_v.data[i]) + (1.0 - beta2) * gi * gi;
                p->adam_m.data[i] = static_cast<Real>(m);
                p->adam_v.data[i] = static_cast<Real>(v);
                const double mh = m / bc1;
                const double vh = v / bc2;
                p->value.data[i] -= static_cast<Real>(lr * mh / (std::sqrt(vh) + eps));
            }
        }
    }

    std::vector<Tensor<Real>> snapshot_values() const {
        std::vector<Tensor<Real>> out;
        out.reserve(params_.size());
        for (auto& p : params_) out.push_back(p->value);
        return out;
    }

    void restore_values(const std::vector<Tensor<Real>>& snap) {
        if (snap.size() != params_.size())
            throw InvalidArgument("snapshot does not match parameter store");
        for (size_t i = 0; i < snap.size(); ++i) {
            if (!params_[i]->value.same_shape(snap[i]))
                throw InvalidArgument("snapshot shape mismatch: " + params_[i]->name);
            params_[i]->value = snap[i];
        }
    }

    // FNV-1a over parameter names and value bytes; detects any mutation.
    std::uint64_t value_hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](const void* ptr, size_t len) {
            const unsigned char* b = static_cast<const unsigned char*>(ptr);
            for (size_t i = 0; i < len; ++i) {
                h ^= b[i];
                h *= 1099511628211ull;
            }
        };
        for (auto& p : params_) {
            mix(p->name.data(), p->name.size());
            mix(p->value.data.data(), p->value.data.size() * sizeof(Real));
        }
        return h;
    }

private:
    std::vector<std::unique_ptr<Parameter<Real>>> params_;
    std::unordered_map<std::string, Parameter<Real>*> by_name_;
};

}  // namespace neta
