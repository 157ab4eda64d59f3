#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "neta/types.hpp"

namespace neta {

// Full-vocabulary score vector for one example.
using Scorer = std::function<std::vector<double>(const TrainingExample&)>;

struct EvalReport {
    std::vector<int> cutoffs;
    std::map<int, double> recall;
    std::map<int, double> mrr;
    std::int64_t evaluated = 0;
    std::int64_t skipped = 0;             // labels outside the vocabulary
    std::vector<std::int64_t> ranks;      // per evaluated example, input order
};

// 1-based rank with a deterministic tie rule: strictly greater scores rank
// ahead, equal scores rank ahead only with a smaller item id.
std::int64_t rank_of_target(const std::vector<double>& scores, ItemId target);

double recall_at_k(const std::vector<std::int64_t>& ranks, int k);
double mrr_at_k(const std::vector<std::int64_t>& ranks, int k);

EvalReport evaluate(const Scorer& scorer, const std::vector<TrainingExample>& examples,
                    const std::vector<int>& cutoffs = {5, 10, 20});

// One line per (model, dataset, K, metric): structured key=value records.
std::string format_report(const EvalReport& report, const std::string& model,
                          const std::string& dataset);

}  // namespace neta
