#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "neta/corpus.hpp"
#include "neta/types.hpp"

namespace testutil {

inline neta::Session make_session(neta::SessionId id, std::vector<neta::ItemId> items,
                                  std::int64_t start_time) {
    neta::Session s;
    s.id = id;
    s.items = std::move(items);
    s.start_time = start_time;
    return s;
}

// Corpus over items "0".."m-1" whose internal and external ids coincide.
// Session ids are positional, matching preprocessed corpora.
inline neta::Corpus make_corpus(std::int64_t vocab,
                                const std::vector<std::pair<std::vector<neta::ItemId>, std::int64_t>>& sessions) {
    neta::Corpus c;
    for (std::int64_t i = 0; i < vocab; ++i) c.vocab.add(std::to_string(i));
    neta::SessionId id = 0;
    for (const auto& [items, start] : sessions)
        c.sessions.push_back(make_session(id++, items, start));
    return c;
}

// Unique scratch directory per test run, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("neta_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testutil
