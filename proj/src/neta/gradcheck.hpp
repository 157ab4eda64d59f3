#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "neta/params.hpp"

namespace neta {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst;      // "name[i]" of the worst coordinate
    std::int64_t checked = 0;

    bool ok(double tol = 1e-4) const { return checked > 0 && max_rel_err <= tol; }
};

// Central finite differences against the tape's gradients. `loss_fn` must
// rebuild the graph, run backward into the store, and return the loss value;
// it has to be deterministic across calls (no dropout). 64-bit stores only.
inline GradCheckResult check_gradients(ParameterStore<double>& store,
                                       const std::function<double()>& loss_fn,
                                       double step = 1e-3, std::int64_t stride = 1) {
    store.zero_grads();
    loss_fn();
    std::vector<Tensor<double>> analytic;
    for (const Parameter<double>* p : store.all()) analytic.push_back(p->grad);

    GradCheckResult res;
    auto params = store.all();
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Parameter<double>* p = params[pi];
        for (size_t i = 0; i < p->value.data.size(); i += static_cast<size_t>(stride)) {
            const double orig = p->value.data[i];
            p->value.data[i] = orig + step;
            store.zero_grads();
            const double lp = loss_fn();
            p->value.data[i] = orig - step;
            store.zero_grads();
            const double lm = loss_fn();
            p->value.data[i] = orig;
            const double numeric = (lp - lm) / (2.0 * step);
            const double a = analytic[pi].data[i];
            // the floor keeps central-difference roundoff (~1e-11 absolute on
            // a loss of order one) from swamping near-zero coordinates
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
            ++res.checked;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst = p->name + "[" + std::to_string(i) + "]";
            }
        }
    }
    store.zero_grads();
    return res;
}

}  // namespace neta
