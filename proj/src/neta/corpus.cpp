#include "neta/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace neta {

std::int64_t Corpus::click_count() const {
    std::int64_t n = 0;
    for (const auto& s : sessions) n += static_cast<std::int64_t>(s.items.size());
    return n;
}

double Corpus::avg_session_length() const {
    if (sessions.empty()) return 0.0;
    return static_cast<double>(click_count()) / static_cast<double>(sessions.size());
}

namespace {

bool parse_i64(std::string_view text, std::int64_t& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// Splits on tabs; falls back to whitespace when the line has no tab at all,
// so hand-written toy logs work too.
std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    if (line.find('\t') != std::string_view::npos) {
        size_t start = 0;
        while (start <= line.size()) {
            size_t tab = line.find('\t', start);
            if (tab == std::string_view::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
    } else {
        size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i > start) fields.push_back(line.substr(start, i - start));
        }
    }
    return fields;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

std::vector<ClickEvent> parse_click_log(std::istream& in, ParseStats& stats) {
    std::vector<ClickEvent> events;
    std::string line;
    std::int64_t row = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++row;
        std::string_view view = strip_cr(line);
        if (view.empty() || view.front() == '#') continue;
        auto fields = split_fields(view);
        std::int64_t ts = 0;
        bool ok = fields.size() >= 3 && !fields[1].empty() && parse_i64(fields[2], ts) && ts >= 0;
        if (first_data_line) {
            first_data_line = false;
            std::int64_t ignored;
            if (fields.size() >= 3 && !parse_i64(fields[2], ignored)) continue;  // header line
        }
        if (!ok) {
            ++stats.rejected;
            continue;
        }
        ++stats.parsed;
        events.push_back(ClickEvent{std::string(fields[0]), std::string(fields[1]), ts, row});
    }
    return events;
}

std::vector<ClickEvent> parse_click_log_file(const std::string& path, ParseStats& stats) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open click log: " + path);
    return parse_click_log(in, stats);
}

std::vector<RawSession> sessionize(const std::vector<ClickEvent>& events,
                                   std::int64_t gap_seconds,
                                   ParseStats* stats) {
    if (gap_seconds <= 0) throw InvalidArgument("gap_seconds must be positive");

    // Group per actor in first-appearance order so output never depends on
    // hash-table iteration.
    std::unordered_map<std::string, size_t> actor_index;
    std::vector<std::vector<const ClickEvent*>> per_actor;
    for (const auto& ev : events) {
        auto [it, inserted] = actor_index.try_emplace(ev.actor_id, per_actor.size());
        if (inserted) per_actor.emplace_back();
        per_actor[it->second].push_back(&ev);
    }

    std::vector<RawSession> sessions;
    for (auto& clicks : per_actor) {
        std::stable_sort(clicks.begin(), clicks.end(), [](const ClickEvent* a, const ClickEvent* b) {
            if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
            return a->row < b->row;
        });

        RawSession current;
        const ClickEvent* prev = nullptr;
        for (const ClickEvent* ev : clicks) {
            if (prev && ev->timestamp == prev->timestamp && ev->item_id == prev->item_id) {
                if (stats) ++stats->deduped;
                continue;
            }
            if (prev && ev->timestamp - prev->timestamp > gap_seconds) {
                sessions.push_back(std::move(current));
                current = RawSession{};
            }
            if (current.items.empty()) {
                current.start_time = ev->timestamp;
                current.actor = ev->actor_id;
                current.first_row = ev->row;
            }
            current.items.push_back(ev->item_id);
            prev = ev;
        }
        if (!current.items.empty()) sessions.push_back(std::move(current));
    }

    std::sort(sessions.begin(), sessions.end(), [](const RawSession& a, const RawSession& b) {
        if (a.start_time != b.start_time) return a.start_time < b.start_time;
        return a.first_row < b.first_row;
    });
    return sessions;
}

Corpus filter_corpus(const std::vector<RawSession>& sessions,
                     int min_item_support,
                     int min_session_len) {
    if (min_item_support < 1) throw InvalidArgument("min_item_support must be >= 1");
    if (min_session_len < 2) throw InvalidArgument("min_session_len must be >= 2");

    std::vector<RawSession> live = sessions;
    bool changed = true;
    while (changed) {
        changed = false;

        size_t kept = 0;
        for (auto& s : live) {
            if (static_cast<int>(s.items.size()) >= min_session_len) {
                if (kept != static_cast<size_t>(&s - live.data())) live[kept] = std::move(s);
                ++kept;
            } else {
                changed = true;
            }
        }
        live.resize(kept);

        std::unordered_map<std::string, std::int64_t> support;
        for (const auto& s : live)
            for (const auto& item : s.items) ++support[item];

        bool any_below = false;
        for (const auto& [item, count] : support) {
            if (count < min_item_support) {
                any_below = true;
                break;
            }
        }
        if (any_below) {
            changed = true;
            for (auto& s : live) {
                std::erase_if(s.items, [&](const std::string& item) {
                    return support.at(item) < min_item_support;
                });
            }
        }
    }

    if (live.empty()) throw DataError("filtering removed every session from the corpus");

    Corpus corpus;
    for (auto& s : live) {
        Session out;
        out.id = static_cast<SessionId>(corpus.sessions.size());
        out.start_time = s.start_time;
        out.actor = s.actor;
        out.items.reserve(s.items.size());
        for (const auto& item : s.items) out.items.push_back(corpus.vocab.add(item));
        corpus.sessions.push_back(std::move(out));
    }
    return corpus;
}

SplitResult temporal_split(const Corpus& corpus,
                           std::int64_t test_window_seconds,
                           int min_session_len) {
    if (corpus.sessions.empty()) throw DataError("cannot split an empty corpus");
    if (test_window_seconds <= 0) throw InvalidArgument("test window must be positive");

    std::int64_t max_start = corpus.sessions.front().start_time;
    for (const auto& s : corpus.sessions) max_start = std::max(max_start, s.start_time);
    const std::int64_t boundary = max_start - test_window_seconds;

    SplitResult result;
    std::vector<const Session*> train_sessions, test_sessions;
    for (const auto& s : corpus.sessions) {
        (s.start_time > boundary ? test_sessions : train_sessions).push_back(&s);
    }
    if (train_sessions.empty())
        throw DataError("temporal split left the train set empty; shrink the test window");

    // Vocabulary is rebuilt from train sessions only; ids stay dense.
    std::unordered_map<ItemId, ItemId> remap;
    for (const Session* s : train_sessions) {
        Session out;
        out.id = static_cast<SessionId>(result.train.sessions.size());
        out.start_time = s->start_time;
        out.actor = s->actor;
        for (ItemId old_id : s->items) {
            auto it = remap.find(old_id);
            ItemId new_id;
            if (it == remap.end()) {
                new_id = result.train.vocab.add(corpus.vocab.external(old_id));
                remap.emplace(old_id, new_id);
            } else {
                new_id = it->second;
            }
            out.items.push_back(new_id);
        }
        result.train.sessions.push_back(std::move(out));
    }

    // Test ids continue after the train range so the two id spaces never
    // collide (retrieval excludes sessions by id).
    result.test.vocab = result.train.vocab;
    SessionId next_id = static_cast<SessionId>(result.train.sessions.size());
    for (const Session* s : test_sessions) {
        Session out;
        out.start_time = s->start_time;
        out.actor = s->actor;
        for (ItemId old_id : s->items) {
            auto it = remap.find(old_id);
            if (it == remap.end()) {
                ++result.test_items_removed;
            } else {
                out.items.push_back(it->second);
            }
        }
        if (static_cast<int>(out.items.size()) >= min_session_len) {
            out.id = next_id++;
            result.test.sessions.push_back(std::move(out));
        } else {
            ++result.test_sessions_dropped;
        }
    }
    // the raw window always holds the latest session, so emptiness can only
    // arise from vocabulary cleanup dropping everything in it
    result.test_empty_warning = result.test.sessions.empty();
    return result;
}

std::vector<TrainingExample> expand_prefixes(const Session& session) {
    std::vector<TrainingExample> examples;
    const size_t n = session.items.size();
    if (n < 2) return examples;
    examples.reserve(n - 1);
    for (size_t t = 1; t < n; ++t) {
        TrainingExample ex;
        ex.prefix.assign(session.items.begin(), session.items.begin() + static_cast<std::ptrdiff_t>(t));
        ex.label = session.items[t];
        ex.session_time = session.start_time;
        ex.parent_session = session.id;
        examples.push_back(std::move(ex));
    }
    return examples;
}

std::vector<TrainingExample> expand_corpus(const Corpus& corpus) {
    std::vector<TrainingExample> examples;
    for (const auto& s : corpus.sessions) {
        auto ex = expand_prefixes(s);
        examples.insert(examples.end(), std::make_move_iterator(ex.begin()),
                        std::make_move_iterator(ex.end()));
    }
    return examples;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
    if (!out) throw IoError("cannot write corpus file: " + path);
    out << kCorpusMagic << '\n';
    out << "items " << corpus.vocab.size() << '\n';
    for (const auto& item : corpus.vocab.all()) {
        if (item.find('\n') != std::string::npos)
            throw DataError("item id contains a newline: " + item);
        out << item << '\n';
    }
    out << "sessions " << corpus.sessions.size() << '\n';
    for (const auto& s : corpus.sessions) {
        out << s.id << ' ' << s.start_time << ' ' << s.items.size();
        for (ItemId id : s.items) out << ' ' << id;
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kCorpusMagic)
        throw IoError("not a " + std::string(kCorpusMagic) + " file: " + path);

    Corpus corpus;
    std::string word;
    std::int64_t item_count = 0;
    if (!(in >> word >> item_count) || word != "items" || item_count < 0)
        throw IoError("corrupt corpus header: " + path);
    in.ignore();  // rest of the count line
    for (std::int64_t i = 0; i < item_count; ++i) {
        if (!std::getline(in, line)) throw IoError("truncated vocabulary: " + path);
        corpus.vocab.add(std::string(strip_cr(line)));
    }
    if (corpus.vocab.size() != static_cast<size_t>(item_count))
        throw IoError("duplicate items in vocabulary table: " + path);

    std::int64_t session_count = 0;
    if (!(in >> word >> session_count) || word != "sessions" || session_count < 0)
        throw IoError("corrupt session header: " + path);
    corpus.sessions.reserve(static_cast<size_t>(session_count));
    for (std::int64_t i = 0; i < session_count; ++i) {
        Session s;
        std::int64_t len = 0;
        if (!(in >> s.id >> s.start_time >> len) || len < 0)
            throw IoError("corrupt session record: " + path);
        s.items.resize(static_cast<size_t>(len));
        for (auto& id : s.items) {
            if (!(in >> id) || id < 0 || static_cast<size_t>(id) >= corpus.vocab.size())
                throw IoError("session references unknown item id: " + path);
        }
        corpus.sessions.push_back(std::move(s));
    }
    return corpus;
}

PreprocessResult preprocess_log(const std::string& input_path, const PreprocessOptions& opts) {
    ParseStats stats;
    auto events = parse_click_log_file(input_path, stats);
    auto raw = sessionize(events, opts.gap_seconds, &stats);
    Corpus filtered = filter_corpus(raw, opts.min_item_support, opts.min_session_len);

    PreprocessResult result;
    result.summary.sessions = static_cast<std::int64_t>(filtered.sessions.size());
    result.summary.clicks = filtered.click_count();
    result.summary.avg_length = filtered.avg_session_length();
    result.summary.parse = stats;

    auto split = temporal_split(filtered, opts.test_window_seconds, opts.min_session_len);
    result.summary.items = static_cast<std::int64_t>(split.train.vocab.size());
    result.summary.train_sessions = static_cast<std::int64_t>(split.train.sessions.size());
    result.summary.test_sessions = static_cast<std::int64_t>(split.test.sessions.size());
    result.summary.test_empty_warning = split.test_empty_warning;
    result.summary.test_items_removed = split.test_items_removed;
    result.summary.test_sessions_dropped = split.test_sessions_dropped;
    for (const auto& s : split.train.sessions)
        result.summary.train_examples += static_cast<std::int64_t>(s.items.size()) - 1;
    for (const auto& s : split.test.sessions)
        result.summary.test_examples += static_cast<std::int64_t>(s.items.size()) - 1;
    result.train = std::move(split.train);
    result.test = std::move(split.test);
    return result;
}

}  // namespace neta
