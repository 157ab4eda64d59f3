#include "neta/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "neta/error.hpp"
#include "neta/threads.hpp"

namespace neta {

std::int64_t rank_of_target(const std::vector<double>& scores, ItemId target) {
    if (target < 0 || static_cast<size_t>(target) >= scores.size())
        throw InvalidArgument("rank_of_target: target outside score vector");
    const double st = scores[static_cast<size_t>(target)];
    std::int64_t rank = 1;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (static_cast<ItemId>(i) == target) continue;
        if (scores[i] > st) ++rank;
        else if (scores[i] == st && static_cast<ItemId>(i) < target) ++rank;
    }
    return rank;
}

double recall_at_k(const std::vector<std::int64_t>& ranks, int k) {
    if (ranks.empty()) throw InvalidArgument("recall_at_k: no ranks");
    std::int64_t hits = 0;
    for (std::int64_t r : ranks)
        if (r <= k) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mrr_at_k(const std::vector<std::int64_t>& ranks, int k) {
    if (ranks.empty()) throw InvalidArgument("mrr_at_k: no ranks");
    double sum = 0.0;
    for (std::int64_t r : ranks)
        if (r <= k) sum += 1.0 / static_cast<double>(r);
    return sum / static_cast<double>(ranks.size());
}

EvalReport evaluate(const Scorer& scorer, const std::vector<TrainingExample>& examples,
                    const std::vector<int>& cutoffs) {
    EvalReport report;
    report.cutoffs = cutoffs;
    // rank < 0 marks a skipped example; slot-per-example keeps parallel runs
    // byte-identical to sequential ones
    std::vector<std::int64_t> slots(examples.size(), -1);
    parallel_for(static_cast<std::int64_t>(examples.size()), [&](std::int64_t i) {
        const TrainingExample& ex = examples[static_cast<size_t>(i)];
        const std::vector<double> scores = scorer(ex);
        if (ex.label < 0 || static_cast<size_t>(ex.label) >= scores.size()) return;
        slots[static_cast<size_t>(i)] = rank_of_target(scores, ex.label);
    });
    for (std::int64_t r : slots) {
        if (r < 0) {
            ++report.skipped;
            continue;
        }
        report.ranks.push_back(r);
        ++report.evaluated;
    }
    if (report.evaluated == 0) throw DataError("evaluate: no scorable examples");
    for (int k : cutoffs) {
        report.recall[k] = recall_at_k(report.ranks, k);
        report.mrr[k] = mrr_at_k(report.ranks, k);
    }
    return report;
}

std::string format_report(const EvalReport& report, const std::string& model,
                          const std::string& dataset) {
    std::string out;
    char line[256];
    for (int k : report.cutoffs) {
        std::snprintf(line, sizeof(line), "model=%s dataset=%s K=%d metric=recall value=%.6f N=%lld\n",
                      model.c_str(), dataset.c_str(), k, report.recall.at(k),
                      static_cast<long long>(report.evaluated));
        out += line;
        std::snprintf(line, sizeof(line), "model=%s dataset=%s K=%d metric=mrr value=%.6f N=%lld\n",
                      model.c_str(), dataset.c_str(), k, report.mrr.at(k),
                      static_cast<long long>(report.evaluated));
        out += line;
    }
    return out;
}

}  // namespace neta
