#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neta/types.hpp"

namespace neta {

// A preprocessed corpus: dense vocabulary plus sessions over it.
struct Corpus {
    ItemVocabulary vocab;
    std::vector<Session> sessions;

    std::int64_t click_count() const;
    double avg_session_length() const;
};

struct ParseStats {
    std::int64_t parsed = 0;     // well-formed event lines
    std::int64_t rejected = 0;   // malformed lines dropped
    std::int64_t deduped = 0;    // same-timestamp duplicate clicks dropped
};

// Reads a delimited click log: `actor <TAB> item <TAB> unix_seconds` per line.
// `#` lines are skipped; a header line is detected by a non-numeric timestamp
// field. Malformed rows are counted in stats.rejected, not fatal.
std::vector<ClickEvent> parse_click_log(std::istream& in, ParseStats& stats);
std::vector<ClickEvent> parse_click_log_file(const std::string& path, ParseStats& stats);

// Splits each actor's clicks into sessions wherever the inter-click gap
// exceeds gap_seconds. Exact same-timestamp duplicates of one item collapse
// to the first occurrence (counted in stats.deduped when given).
std::vector<RawSession> sessionize(const std::vector<ClickEvent>& events,
                                   std::int64_t gap_seconds,
                                   ParseStats* stats = nullptr);

// Iteratively drops items with corpus support below min_item_support and
// sessions shorter than min_session_len until neither rule fires, then builds
// the dense vocabulary from the survivors. Throws DataError when nothing
// survives.
Corpus filter_corpus(const std::vector<RawSession>& sessions,
                     int min_item_support,
                     int min_session_len);

struct SplitResult {
    Corpus train;
    Corpus test;
    bool test_empty_warning = false;
    std::int64_t test_items_removed = 0;   // test clicks on items unseen in train
    std::int64_t test_sessions_dropped = 0;
};

// Sessions starting within the final test_window_seconds of the corpus time
// range become the test split. Test items absent from the train split are
// removed and the minimum session length re-applied; both splits share one
// vocabulary built from the train split only.
SplitResult temporal_split(const Corpus& corpus,
                           std::int64_t test_window_seconds,
                           int min_session_len);

// ([s1],s2), ([s1,s2],s3), ... ([s1..s(n-1)],sn); empty for length < 2.
std::vector<TrainingExample> expand_prefixes(const Session& session);

// Prefix expansion over a whole corpus, in session order.
std::vector<TrainingExample> expand_corpus(const Corpus& corpus);

// Corpus file format, versioned by a magic first line.
inline constexpr const char* kCorpusMagic = "NETA-CORPUS-v1";

void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

struct PreprocessOptions {
    std::int64_t gap_seconds = 1800;
    int min_item_support = 5;
    int min_session_len = 2;
    std::int64_t test_window_seconds = 7 * 86400;
};

struct PreprocessSummary {
    std::int64_t sessions = 0;        // after filtering, before split
    std::int64_t clicks = 0;
    std::int64_t items = 0;           // train vocabulary size
    double avg_length = 0.0;
    std::int64_t train_sessions = 0;  // raw session counts per split
    std::int64_t test_sessions = 0;
    std::int64_t train_examples = 0;  // prefix-expanded counts per split
    std::int64_t test_examples = 0;
    std::int64_t test_items_removed = 0;
    std::int64_t test_sessions_dropped = 0;
    ParseStats parse;
    bool test_empty_warning = false;
};

struct PreprocessResult {
    Corpus train;
    Corpus test;
    PreprocessSummary summary;
};

// Full pipeline: parse -> sessionize -> filter -> split.
PreprocessResult preprocess_log(const std::string& input_path, const PreprocessOptions& opts);

}  // namespace neta
