#include "neta/neta.h"

#include <algorithm>
#include <cstring>
#include <sstream>
#include <string>

#include "neta/baselines.hpp"
#include "neta/corpus.hpp"
#include "neta/evaluation.hpp"
#include "neta/model.hpp"
#include "neta/pipeline.hpp"
#include "neta/session_index.hpp"
#include "neta/training.hpp"

struct neta_corpus {
    neta::Corpus train;
    neta::Corpus test;
};

struct neta_model {
    neta::Model<float> model;
    std::string encoder;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename F>
neta_status guarded(F f) {
    try {
        f();
        g_last_error.clear();
        return NETA_OK;
    } catch (const neta::InvalidArgument& e) {
        set_error(e.what());
        return NETA_ERR_INVALID_ARGUMENT;
    } catch (const neta::IoError& e) {
        set_error(e.what());
        return NETA_ERR_IO;
    } catch (const neta::DataError& e) {
        set_error(e.what());
        return NETA_ERR_DATA;
    } catch (const neta::DivergenceError& e) {
        set_error(e.what());
        return NETA_ERR_DIVERGED;
    } catch (const std::exception& e) {
        set_error(e.what());
        return NETA_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown failure");
        return NETA_ERR_INTERNAL;
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

void require(bool cond, const char* msg) {
    if (!cond) throw neta::InvalidArgument(msg);
}

std::int64_t max_train_start(const neta::Corpus& train) {
    std::int64_t t = 0;
    for (const auto& s : train.sessions) t = std::max(t, s.start_time);
    return t;
}

}  // namespace

extern "C" {

const char* neta_last_error(void) { return g_last_error.c_str(); }

void neta_string_free(char* s) { delete[] s; }

void neta_preprocess_options_init(neta_preprocess_options* opts) {
    if (!opts) return;
    opts->gap_seconds = 30 * 60;
    opts->min_item_support = 5;
    opts->min_session_len = 2;
    opts->test_window_seconds = 7LL * 86400;
}

neta_status neta_preprocess(const char* input_path, const char* output_stem,
                            const neta_preprocess_options* opts, char** summary_out) {
    return guarded([&] {
        require(input_path && output_stem, "input path and output stem are required");
        neta::PreprocessOptions po;
        if (opts) {
            po.gap_seconds = opts->gap_seconds;
            po.min_item_support = opts->min_item_support;
            po.min_session_len = opts->min_session_len;
            po.test_window_seconds = opts->test_window_seconds;
        }
        const neta::PreprocessResult res = neta::preprocess_log(input_path, po);
        neta::save_corpus(res.train, std::string(output_stem) + ".train");
        neta::save_corpus(res.test, std::string(output_stem) + ".test");
        if (summary_out) {
            const neta::PreprocessSummary& s = res.summary;
            std::ostringstream os;
            os << "sessions=" << s.sessions << "\n"
               << "clicks=" << s.clicks << "\n"
               << "items=" << s.items << "\n"
               << "avg_session_length=" << s.avg_length << "\n"
               << "train_sessions=" << s.train_sessions << "\n"
               << "test_sessions=" << s.test_sessions << "\n"
               << "train_examples=" << s.train_examples << "\n"
               << "test_examples=" << s.test_examples << "\n"
               << "rows_parsed=" << s.parse.parsed << "\n"
               << "rows_rejected=" << s.parse.rejected << "\n"
               << "clicks_deduped=" << s.parse.deduped << "\n"
               << "test_items_removed=" << s.test_items_removed << "\n"
               << "test_sessions_dropped=" << s.test_sessions_dropped << "\n";
            *summary_out = copy_string(os.str());
        }
    });
}

neta_status neta_corpus_open(const char* stem, neta_corpus** out) {
    return guarded([&] {
        require(stem && out, "stem and out are required");
        auto c = std::make_unique<neta_corpus>();
        c->train = neta::load_corpus(std::string(stem) + ".train");
        c->test = neta::load_corpus(std::string(stem) + ".test");
        if (c->test.vocab.size() != c->train.vocab.size())
            throw neta::DataError("train/test vocabulary size mismatch");
        *out = c.release();
    });
}

void neta_corpus_close(neta_corpus* corpus) { delete corpus; }

long long neta_corpus_vocab_size(const neta_corpus* corpus) {
    return corpus ? static_cast<long long>(corpus->train.vocab.size()) : 0;
}

long long neta_corpus_train_sessions(const neta_corpus* corpus) {
    return corpus ? static_cast<long long>(corpus->train.sessions.size()) : 0;
}

long long neta_corpus_test_sessions(const neta_corpus* corpus) {
    return corpus ? static_cast<long long>(corpus->test.sessions.size()) : 0;
}

void neta_train_options_init(neta_train_options* opts) {
    if (!opts) return;
    opts->encoder = "narm";
    opts->dim = 100;
    opts->heads = 4;
    opts->neighbors = 40;
    opts->time_head = 1;
    opts->time_dim = 8;
    opts->loss = "bernoulli";
    opts->max_session_len = 20;
    opts->lr = 0.0005;
    opts->lr_decay = 0.9;
    opts->batch_size = 512;
    opts->max_epochs = 30;
    opts->patience = 3;
    opts->val_fraction = 0.10;
    opts->seed = 42;
}

neta_status neta_train(const neta_corpus* corpus, const neta_train_options* opts,
                       neta_log_fn log, void* log_user, neta_model** out) {
    return guarded([&] {
        require(corpus && opts && out, "corpus, options, and out are required");
        require(opts->encoder, "encoder is required");
        neta::ModelConfig mc;
        const std::string enc = opts->encoder;
        if (enc == "narm") mc.encoder = neta::EncoderKind::Narm;
        else if (enc == "stamp") mc.encoder = neta::EncoderKind::Stamp;
        else throw neta::InvalidArgument("unknown encoder: " + enc);
        mc.dim = opts->dim;
        mc.heads = opts->heads;
        mc.neighbors = opts->neighbors;
        mc.time_head = opts->time_head != 0;
        mc.time_dim = opts->time_dim;
        mc.max_session_len = opts->max_session_len;
        const std::string loss = opts->loss ? opts->loss : "bernoulli";
        if (loss == "bernoulli") mc.loss = neta::LossKind::Bernoulli;
        else if (loss == "categorical") mc.loss = neta::LossKind::Categorical;
        else throw neta::InvalidArgument("unknown loss: " + loss);
        mc.vocab = static_cast<std::int32_t>(corpus->train.vocab.size());

        neta::TrainConfig tc;
        tc.lr = opts->lr;
        tc.lr_decay = opts->lr_decay;
        tc.batch_size = opts->batch_size;
        tc.max_epochs = opts->max_epochs;
        tc.patience = opts->patience;
        tc.val_fraction = opts->val_fraction;
        tc.seed = opts->seed;

        auto holder = std::make_unique<neta_model>(
            neta_model{neta::Model<float>(mc, opts->seed), enc});
        neta::LogFn log_fn;
        if (log) log_fn = [log, log_user](const std::string& line) { log(line.c_str(), log_user); };
        neta::train_model(holder->model, corpus->train, tc, log_fn);
        *out = holder.release();
    });
}

neta_status neta_model_save(const neta_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "model and path are required");
        neta::save_checkpoint(model->model, path);
    });
}

neta_status neta_model_load(const char* path, neta_model** out) {
    return guarded([&] {
        require(path && out, "path and out are required");
        auto m = neta::load_checkpoint<float>(path);
        const std::string enc = neta::encoder_name(m.cfg.encoder);
        *out = new neta_model{std::move(m), enc};
    });
}

void neta_model_close(neta_model* model) { delete model; }

long long neta_model_vocab_size(const neta_model* model) {
    return model ? model->model.cfg.vocab : 0;
}

const char* neta_model_encoder(const neta_model* model) {
    return model ? model->encoder.c_str() : "";
}

neta_status neta_evaluate(neta_model* model, const neta_corpus* corpus,
                          const char* model_name, const char* dataset_name,
                          const int* cutoffs, int n_cutoffs, char** report_out) {
    return guarded([&] {
        require(corpus && model_name && report_out, "corpus, model_name, and report_out are required");
        const std::string name = model_name;
        std::vector<int> ks = {5, 10, 20};
        if (cutoffs && n_cutoffs > 0) ks.assign(cutoffs, cutoffs + n_cutoffs);
        const std::string dataset = dataset_name ? dataset_name : "corpus";

        const std::vector<neta::TrainingExample> examples = neta::expand_corpus(corpus->test);
        if (examples.empty()) throw neta::DataError("test split has no examples");

        neta::EvalReport report;
        if (name == "neta" || name == "narm" || name == "stamp") {
            require(model != nullptr, "neural evaluation needs a model handle");
            if (model->model.cfg.vocab != static_cast<std::int32_t>(corpus->train.vocab.size()))
                throw neta::InvalidArgument("model vocabulary does not match the corpus");
            if (name != "neta" && name != model->encoder)
                throw neta::InvalidArgument("checkpoint encoder is " + model->encoder +
                                            ", not " + name);
            const neta::SessionIndex index = neta::SessionIndex::build(corpus->train.sessions);
            const bool use_neighbors = name == "neta";
            auto scorer =
                neta::make_neta_scorer(model->model, corpus->train, index, use_neighbors);
            report = neta::evaluate(scorer, examples, ks);
        } else if (name == "pop" || name == "spop" || name == "itemknn") {
            const neta::BaselineStats stats = neta::build_baseline_stats(corpus->train);
            auto scorer = name == "pop"      ? neta::make_pop_scorer(stats)
                          : name == "spop"   ? neta::make_spop_scorer(stats)
                                             : neta::make_itemknn_scorer(stats);
            report = neta::evaluate(scorer, examples, ks);
        } else if (name == "sknn") {
            const neta::SessionIndex index = neta::SessionIndex::build(corpus->train.sessions);
            neta::RetrievalOptions opts;
            opts.k = 40;
            auto scorer = neta::make_sknn_scorer(
                index, opts, static_cast<std::int64_t>(corpus->train.vocab.size()));
            report = neta::evaluate(scorer, examples, ks);
        } else {
            throw neta::InvalidArgument("unknown model name: " + name);
        }
        *report_out = copy_string(neta::format_report(report, name, dataset));
    });
}

neta_status neta_recommend(neta_model* model, const neta_corpus* corpus,
                           const char* session_csv, int top_n, char** out) {
    return guarded([&] {
        require(model && corpus && session_csv && out, "model, corpus, session, and out are required");
        require(top_n > 0, "top_n must be positive");
        if (model->model.cfg.vocab != static_cast<std::int32_t>(corpus->train.vocab.size()))
            throw neta::InvalidArgument("model vocabulary does not match the corpus");

        std::vector<neta::ItemId> prefix;
        std::stringstream ss(session_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const size_t b = tok.find_first_not_of(" \t");
            const size_t e = tok.find_last_not_of(" \t");
            if (b == std::string::npos) continue;
            tok = tok.substr(b, e - b + 1);
            const neta::ItemId id = corpus->train.vocab.lookup(tok);
            if (id < 0) throw neta::InvalidArgument("unknown item in session: " + tok);
            prefix.push_back(id);
        }
        if (prefix.empty()) throw neta::InvalidArgument("session has no items");

        const neta::SessionIndex index = neta::SessionIndex::build(corpus->train.sessions);
        neta::TrainingExample ex;
        ex.prefix = prefix;
        ex.label = -1;
        ex.session_time = max_train_start(corpus->train) + 1;  // ad-hoc session is "now"
        ex.parent_session = -1;
        neta::RetrievalOptions ropts;
        const std::vector<double> scores =
            neta::neta_example_scores(model->model, corpus->train, index, ex, true, ropts);

        std::vector<neta::ItemId> ids(scores.size());
        for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<neta::ItemId>(i);
        std::sort(ids.begin(), ids.end(), [&](neta::ItemId a, neta::ItemId b) {
            if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)])
                return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
            return a < b;
        });
        if (static_cast<int>(ids.size()) > top_n) ids.resize(static_cast<size_t>(top_n));
        std::ostringstream os;
        for (neta::ItemId id : ids)
            os << corpus->train.vocab.external(id) << "\t" << scores[static_cast<size_t>(id)]
               << "\n";
        *out = copy_string(os.str());
    });
}

}  // extern "C"
