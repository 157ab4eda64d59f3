#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "neta/evaluation.hpp"
#include "neta/rng.hpp"

using namespace neta;

namespace {

// stable full ordering that mirrors the documented tie rule
std::vector<ItemId> order_by_score(const std::vector<double>& scores) {
    std::vector<ItemId> ids(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) ids[i] = static_cast<ItemId>(i);
    std::sort(ids.begin(), ids.end(), [&](ItemId a, ItemId b) {
        const double sa = scores[static_cast<size_t>(a)], sb = scores[static_cast<size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    return ids;
}

TrainingExample example_with_label(ItemId label) {
    return TrainingExample{{0}, label, 1000, 0};
}

}  // namespace

TEST_CASE("rank: hand cases including the tie rule") {
    std::vector<double> scores = {0.1, 0.9, 0.4, 0.4, 0.2};
    CHECK(rank_of_target(scores, 1) == 1);
    CHECK(rank_of_target(scores, 2) == 2);   // tie with 3, smaller id wins
    CHECK(rank_of_target(scores, 3) == 3);
    CHECK(rank_of_target(scores, 4) == 4);
    CHECK(rank_of_target(scores, 0) == 5);
    CHECK_THROWS_AS(rank_of_target(scores, 9), InvalidArgument);
    CHECK_THROWS_AS(rank_of_target(scores, -1), InvalidArgument);
    // all-equal scores rank purely by id
    std::vector<double> flat(6, 1.0);
    for (ItemId i = 0; i < 6; ++i) CHECK(rank_of_target(flat, i) == i + 1);
}

TEST_CASE("rank: agrees with a full argsort on random score vectors") {
    Rng rng(701);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores(20);
        for (auto& s : scores) s = rng.uniform_int(0, 9);  // force ties
        const auto order = order_by_score(scores);
        for (size_t pos = 0; pos < order.size(); ++pos) {
            CAPTURE(trial);
            CHECK(rank_of_target(scores, order[pos]) == static_cast<std::int64_t>(pos) + 1);
        }
    }
}

TEST_CASE("metrics: worked example gives 0.75 and 0.4375 at K=20") {
    std::vector<std::int64_t> ranks = {1, 2, 4, 25};
    CHECK(recall_at_k(ranks, 20) == 0.75);
    CHECK(mrr_at_k(ranks, 20) == 0.4375);  // (1 + 1/2 + 1/4 + 0) / 4
    CHECK(recall_at_k(ranks, 1) == 0.25);
    CHECK(mrr_at_k(ranks, 1) == 0.25);
    CHECK(recall_at_k(ranks, 2) == 0.5);
    CHECK(mrr_at_k(ranks, 2) == 0.375);
    CHECK_THROWS_AS(recall_at_k({}, 20), InvalidArgument);
    CHECK_THROWS_AS(mrr_at_k({}, 20), InvalidArgument);
}

TEST_CASE("metrics: monotone in K and mrr never exceeds recall") {
    Rng rng(709);
    std::vector<std::int64_t> ranks;
    for (int i = 0; i < 200; ++i) ranks.push_back(rng.uniform_int(1, 40));
    double prev_recall = 0.0, prev_mrr = 0.0;
    for (int k = 1; k <= 40; ++k) {
        const double r = recall_at_k(ranks, k), m = mrr_at_k(ranks, k);
        CHECK(r >= prev_recall);
        CHECK(m >= prev_mrr);
        CHECK(m <= r + 1e-12);
        prev_recall = r;
        prev_mrr = m;
    }
    CHECK(recall_at_k(ranks, 40) == 1.0);
}

TEST_CASE("evaluate: ranks are per example in input order, skips counted") {
    // scorer gives item (label+1)%4 the top score so the target lands at a
    // known rank; label 9 is outside the 4-item vocabulary and is skipped
    Scorer scorer = [](const TrainingExample& ex) {
        std::vector<double> s(4, 0.0);
        s[static_cast<size_t>(ex.prefix[0])] = 1.0;
        return s;
    };
    std::vector<TrainingExample> examples = {
        {{1}, 1, 0, 0},  // target scored 1.0: rank 1
        {{2}, 1, 0, 1},  // item 2 greater, item 0 tied with smaller id: rank 3
        {{0}, 9, 0, 2},  // label outside vocab: skipped
    };
    auto report = evaluate(scorer, examples, {1, 20});
    CHECK(report.evaluated == 2);
    CHECK(report.skipped == 1);
    REQUIRE(report.ranks.size() == 2);
    CHECK(report.ranks[0] == 1);
    CHECK(report.ranks[1] == 3);
    CHECK(report.recall.at(1) == 0.5);
    CHECK(report.recall.at(20) == 1.0);
    CHECK(report.mrr.at(20) == doctest::Approx(2.0 / 3.0));

    std::vector<TrainingExample> unusable = {{{0}, 9, 0, 0}};
    CHECK_THROWS_AS(evaluate(scorer, unusable, {20}), DataError);
}

TEST_CASE("evaluate: random scorer stays inside a binomial envelope") {
    // with labels drawn uniformly from m=1000 items and random scores,
    // recall@20 has mean 0.02; 3 sigma over 600 trials is about 0.017
    const std::int64_t m = 1000;
    Rng scorer_rng(719);
    Scorer scorer = [&](const TrainingExample&) {
        std::vector<double> s(static_cast<size_t>(m));
        for (auto& v : s) v = scorer_rng.uniform01();
        return s;
    };
    Rng rng(727);
    std::vector<TrainingExample> examples;
    for (int i = 0; i < 600; ++i)
        examples.push_back({{0}, static_cast<ItemId>(rng.uniform_int(0, m - 1)), 0, i});
    auto report = evaluate(scorer, examples, {20});
    const double p = 0.02, sigma = std::sqrt(p * (1 - p) / 600.0);
    CHECK(report.recall.at(20) > p - 3 * sigma);
    CHECK(report.recall.at(20) < p + 3 * sigma);
}

TEST_CASE("evaluate: pure readout, example order only permutes ranks") {
    Rng rng(733);
    std::vector<double> table(10);
    for (auto& v : table) v = rng.uniform01();
    Scorer scorer = [&](const TrainingExample&) { return table; };

    std::vector<TrainingExample> examples;
    for (ItemId label = 0; label < 10; ++label) examples.push_back(example_with_label(label));
    auto fwd = evaluate(scorer, examples, {5, 10});

    std::vector<TrainingExample> rev(examples.rbegin(), examples.rend());
    auto bwd = evaluate(scorer, rev, {5, 10});
    CHECK(fwd.recall == bwd.recall);  // hit counts are order-free
    for (int k : {5, 10})             // reciprocal sums reassociate
        CHECK(fwd.mrr.at(k) == doctest::Approx(bwd.mrr.at(k)).epsilon(1e-12));
    std::vector<std::int64_t> fr = fwd.ranks, br = bwd.ranks;
    std::sort(fr.begin(), fr.end());
    std::sort(br.begin(), br.end());
    CHECK(fr == br);
    // every rank appears exactly once: the table is a permutation readout
    for (size_t i = 0; i < fr.size(); ++i) CHECK(fr[i] == static_cast<std::int64_t>(i) + 1);
}

TEST_CASE("report: one recall and one mrr line per cutoff") {
    std::vector<std::int64_t> ranks = {1, 2, 4, 25};
    EvalReport rep;
    rep.cutoffs = {5, 10, 20};
    rep.evaluated = 4;
    rep.ranks = ranks;
    for (int k : rep.cutoffs) {
        rep.recall[k] = recall_at_k(ranks, k);
        rep.mrr[k] = mrr_at_k(ranks, k);
    }
    const std::string text = format_report(rep, "neta-narm", "toy");
    CHECK(text.find("model=neta-narm dataset=toy K=5 metric=recall value=0.750000 N=4") !=
          std::string::npos);
    CHECK(text.find("model=neta-narm dataset=toy K=20 metric=mrr value=0.437500 N=4") !=
          std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}
