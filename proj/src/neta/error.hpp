#pragma once

#include <stdexcept>
#include <string>

namespace neta {

// Bad user input: malformed flags, inconsistent shapes, unknown names.
class InvalidArgument : public std::runtime_error {
public:
    explicit InvalidArgument(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable/unwritable files or a corpus/checkpoint that fails validation.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data that parses but cannot be worked with (empty corpus, OOV items, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training produced NaN/Inf loss.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace neta
