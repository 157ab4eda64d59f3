#ifndef NETA_H
#define NETA_H

/* Session-based recommendation engine: preprocessing, training, evaluation,
 * and ad-hoc recommendation behind opaque handles. Every call returns a
 * status code; neta_last_error() describes the most recent failure on the
 * calling thread. Strings returned through out-parameters are owned by the
 * caller and released with neta_string_free(). */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum neta_status {
    NETA_OK = 0,
    NETA_ERR_INVALID_ARGUMENT = 1,
    NETA_ERR_IO = 2,
    NETA_ERR_DATA = 3,
    NETA_ERR_DIVERGED = 4,
    NETA_ERR_INTERNAL = 5
} neta_status;

typedef struct neta_corpus neta_corpus;
typedef struct neta_model neta_model;

/* Message for the last failing call on this thread; empty string if none. */
const char* neta_last_error(void);

void neta_string_free(char* s);

typedef struct neta_preprocess_options {
    long long gap_seconds;         /* inactivity gap that splits sessions */
    int min_item_support;
    int min_session_len;
    long long test_window_seconds; /* most recent window becomes the test split */
} neta_preprocess_options;

void neta_preprocess_options_init(neta_preprocess_options* opts);

/* Reads a click log (tab- or space-separated: actor, item, unix-seconds),
 * writes <output_stem>.train and <output_stem>.test, and returns a key=value
 * summary, one pair per line. */
neta_status neta_preprocess(const char* input_path, const char* output_stem,
                            const neta_preprocess_options* opts, char** summary_out);

/* Opens the <stem>.train / <stem>.test pair written by neta_preprocess. */
neta_status neta_corpus_open(const char* stem, neta_corpus** out);
void neta_corpus_close(neta_corpus* corpus);

long long neta_corpus_vocab_size(const neta_corpus* corpus);
long long neta_corpus_train_sessions(const neta_corpus* corpus);
long long neta_corpus_test_sessions(const neta_corpus* corpus);

typedef struct neta_train_options {
    const char* encoder;  /* "narm" | "stamp" */
    int dim;
    int heads;
    int neighbors;        /* 0 trains the sequence-only model */
    int time_head;        /* nonzero enables the temporal attention head */
    int time_dim;
    const char* loss;     /* "bernoulli" | "categorical" */
    int max_session_len;
    double lr;
    double lr_decay;
    int batch_size;
    int max_epochs;
    int patience;
    double val_fraction;
    unsigned long long seed;
} neta_train_options;

void neta_train_options_init(neta_train_options* opts);

/* Receives one progress line per epoch. */
typedef void (*neta_log_fn)(const char* line, void* user);

neta_status neta_train(const neta_corpus* corpus, const neta_train_options* opts,
                       neta_log_fn log, void* log_user, neta_model** out);

neta_status neta_model_save(const neta_model* model, const char* path);
neta_status neta_model_load(const char* path, neta_model** out);
void neta_model_close(neta_model* model);

long long neta_model_vocab_size(const neta_model* model);
const char* neta_model_encoder(const neta_model* model);

/* model_name: neta | narm | stamp | pop | spop | itemknn | sknn. The neural
 * names need a model handle ("narm"/"stamp" force the sequence-only path and
 * must match the checkpoint's encoder); baselines take model = NULL.
 * cutoffs = NULL selects {5, 10, 20}. The report has one line per
 * (model, dataset, K, metric). */
neta_status neta_evaluate(neta_model* model, const neta_corpus* corpus,
                          const char* model_name, const char* dataset_name,
                          const int* cutoffs, int n_cutoffs, char** report_out);

/* session_csv: comma-separated external item ids; unknown ids fail with the
 * offending id in the error message. Output: "item<TAB>score" lines, best
 * first, scored against the full train index. */
neta_status neta_recommend(neta_model* model, const neta_corpus* corpus,
                           const char* session_csv, int top_n, char** out);

#ifdef __cplusplus
}
#endif

#endif /* NETA_H */
