// Command-line front end; all work happens behind the shared-library C API.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neta/neta.h"

namespace {

int status_to_exit(neta_status s) {
    switch (s) {
        case NETA_OK: return 0;
        case NETA_ERR_INVALID_ARGUMENT: return 1;
        case NETA_ERR_DIVERGED: return 3;
        default: return 2;  // IO, data, internal
    }
}

int fail(neta_status s) {
    std::fprintf(stderr, "error: %s\n", neta_last_error());
    return status_to_exit(s);
}

std::string basename_of(const std::string& path) {
    const size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::vector<int> parse_cutoffs(const std::string& csv) {
    std::vector<int> out;
    std::string tok;
    std::stringstream ss(csv);
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    return out;
}

struct CorpusHandle {
    neta_corpus* ptr = nullptr;
    ~CorpusHandle() { neta_corpus_close(ptr); }
};

struct ModelHandle {
    neta_model* ptr = nullptr;
    ~ModelHandle() { neta_model_close(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Session-based recommendation engine"};
    app.require_subcommand(1);

    // preprocess
    std::string pp_input, pp_output;
    long long gap_minutes = 30, test_window_days = 7;
    int min_item_support = 5, min_session_len = 2;
    CLI::App* pp = app.add_subcommand("preprocess", "Sessionize a raw click log");
    pp->add_option("--input", pp_input, "Raw click log (actor, item, unix seconds)")->required();
    pp->add_option("--output", pp_output, "Output stem; writes <stem>.train and <stem>.test")
        ->required();
    pp->add_option("--gap-minutes", gap_minutes, "Inactivity gap starting a new session")
        ->capture_default_str();
    pp->add_option("--min-item-support", min_item_support, "Drop items with fewer clicks")
        ->capture_default_str();
    pp->add_option("--min-session-len", min_session_len, "Drop shorter sessions")
        ->capture_default_str();
    pp->add_option("--test-window-days", test_window_days, "Final window held out as test")
        ->capture_default_str();

    // train
    std::string tr_corpus, tr_checkpoint, tr_encoder = "narm", tr_time_head = "on",
                tr_loss = "bernoulli";
    int tr_neighbors = 40, tr_heads = 4, tr_dim = 100, tr_batch = 512, tr_epochs = 30,
        tr_patience = 3, tr_time_dim = 8, tr_max_len = 20;
    double tr_lr = 0.0005, tr_decay = 0.9, tr_val_fraction = 0.10;
    unsigned long long tr_seed = 42;
    CLI::App* tr = app.add_subcommand("train", "Train a model and write its best checkpoint");
    tr->add_option("--corpus", tr_corpus, "Corpus stem from preprocess")->required();
    tr->add_option("--checkpoint", tr_checkpoint, "Where to write the trained model")->required();
    tr->add_option("--encoder", tr_encoder, "Session encoder")
        ->check(CLI::IsMember({"narm", "stamp"}))
        ->capture_default_str();
    tr->add_option("--neighbors", tr_neighbors, "Retrieved neighbors per example; 0 = sequence-only")
        ->capture_default_str();
    tr->add_option("--heads", tr_heads, "Attention heads")->capture_default_str();
    tr->add_option("--time-head", tr_time_head, "Temporal attention head")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    tr->add_option("--dim", tr_dim, "Embedding dimension")->capture_default_str();
    tr->add_option("--lr", tr_lr, "Learning rate")->capture_default_str();
    tr->add_option("--lr-decay", tr_decay, "Per-epoch learning-rate decay")->capture_default_str();
    tr->add_option("--batch", tr_batch, "Batch size")->capture_default_str();
    tr->add_option("--epochs", tr_epochs, "Maximum epochs")->capture_default_str();
    tr->add_option("--seed", tr_seed, "Random seed")->capture_default_str();
    tr->add_option("--loss", tr_loss, "Training loss")
        ->check(CLI::IsMember({"bernoulli", "categorical"}))
        ->capture_default_str();
    tr->add_option("--patience", tr_patience, "Early-stopping patience (epochs)")
        ->capture_default_str();
    tr->add_option("--val-fraction", tr_val_fraction, "Share of train sessions held for validation")
        ->capture_default_str();
    tr->add_option("--time-dim", tr_time_dim, "Temporal feature width")->capture_default_str();
    tr->add_option("--max-session-len", tr_max_len, "Keep this many most recent clicks")
        ->capture_default_str();

    // evaluate
    std::string ev_corpus, ev_model, ev_checkpoint, ev_cutoffs = "5,10,20";
    CLI::App* ev = app.add_subcommand("evaluate", "Score a model on the test split");
    ev->add_option("--corpus", ev_corpus, "Corpus stem from preprocess")->required();
    ev->add_option("--model", ev_model, "Model to evaluate")
        ->check(CLI::IsMember({"neta", "narm", "stamp", "pop", "spop", "itemknn", "sknn"}))
        ->required();
    ev->add_option("--checkpoint", ev_checkpoint, "Trained model (neural models only)");
    ev->add_option("--cutoffs", ev_cutoffs, "Comma-separated ranking cutoffs")
        ->capture_default_str();

    // recommend
    std::string rc_corpus, rc_checkpoint, rc_session;
    int rc_top = 20;
    CLI::App* rc = app.add_subcommand("recommend", "Top items for an ad-hoc session");
    rc->add_option("--corpus", rc_corpus, "Corpus stem from preprocess")->required();
    rc->add_option("--checkpoint", rc_checkpoint, "Trained model")->required();
    rc->add_option("--session", rc_session, "Comma-separated item ids clicked so far")->required();
    rc->add_option("--top", rc_top, "Number of items to print")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return 1;
    }

    if (pp->parsed()) {
        neta_preprocess_options opts;
        neta_preprocess_options_init(&opts);
        opts.gap_seconds = gap_minutes * 60;
        opts.min_item_support = min_item_support;
        opts.min_session_len = min_session_len;
        opts.test_window_seconds = test_window_days * 86400LL;
        char* summary = nullptr;
        const neta_status s = neta_preprocess(pp_input.c_str(), pp_output.c_str(), &opts, &summary);
        if (s != NETA_OK) return fail(s);
        std::fputs(summary, stdout);
        neta_string_free(summary);
        return 0;
    }

    if (tr->parsed()) {
        CorpusHandle corpus;
        neta_status s = neta_corpus_open(tr_corpus.c_str(), &corpus.ptr);
        if (s != NETA_OK) return fail(s);
        neta_train_options opts;
        neta_train_options_init(&opts);
        opts.encoder = tr_encoder.c_str();
        opts.dim = tr_dim;
        opts.heads = tr_heads;
        opts.neighbors = tr_neighbors;
        opts.time_head = tr_time_head == "on" ? 1 : 0;
        opts.time_dim = tr_time_dim;
        opts.loss = tr_loss.c_str();
        opts.max_session_len = tr_max_len;
        opts.lr = tr_lr;
        opts.lr_decay = tr_decay;
        opts.batch_size = tr_batch;
        opts.max_epochs = tr_epochs;
        opts.patience = tr_patience;
        opts.val_fraction = tr_val_fraction;
        opts.seed = tr_seed;
        ModelHandle model;
        auto log = [](const char* line, void*) { std::printf("%s\n", line); };
        s = neta_train(corpus.ptr, &opts, log, nullptr, &model.ptr);
        if (s != NETA_OK) return fail(s);
        s = neta_model_save(model.ptr, tr_checkpoint.c_str());
        if (s != NETA_OK) return fail(s);
        std::printf("checkpoint=%s\n", tr_checkpoint.c_str());
        return 0;
    }

    if (ev->parsed()) {
        const bool neural = ev_model == "neta" || ev_model == "narm" || ev_model == "stamp";
        if (neural && ev_checkpoint.empty()) {
            std::fprintf(stderr, "error: --model %s requires --checkpoint\n", ev_model.c_str());
            return 1;
        }
        if (!neural && !ev_checkpoint.empty())
            std::fprintf(stderr, "warning: --model %s ignores --checkpoint\n", ev_model.c_str());
        CorpusHandle corpus;
        neta_status s = neta_corpus_open(ev_corpus.c_str(), &corpus.ptr);
        if (s != NETA_OK) return fail(s);
        ModelHandle model;
        if (neural) {
            s = neta_model_load(ev_checkpoint.c_str(), &model.ptr);
            if (s != NETA_OK) return fail(s);
        }
        const std::vector<int> cutoffs = parse_cutoffs(ev_cutoffs);
        if (cutoffs.empty()) {
            std::fprintf(stderr, "error: --cutoffs has no values\n");
            return 1;
        }
        char* report = nullptr;
        s = neta_evaluate(model.ptr, corpus.ptr, ev_model.c_str(),
                          basename_of(ev_corpus).c_str(), cutoffs.data(),
                          static_cast<int>(cutoffs.size()), &report);
        if (s != NETA_OK) return fail(s);
        std::fputs(report, stdout);
        neta_string_free(report);
        return 0;
    }

    if (rc->parsed()) {
        CorpusHandle corpus;
        neta_status s = neta_corpus_open(rc_corpus.c_str(), &corpus.ptr);
        if (s != NETA_OK) return fail(s);
        ModelHandle model;
        s = neta_model_load(rc_checkpoint.c_str(), &model.ptr);
        if (s != NETA_OK) return fail(s);
        char* out = nullptr;
        s = neta_recommend(model.ptr, corpus.ptr, rc_session.c_str(), rc_top, &out);
        if (s != NETA_OK) return fail(s);
        std::fputs(out, stdout);
        neta_string_free(out);
        return 0;
    }

    return 1;
}
