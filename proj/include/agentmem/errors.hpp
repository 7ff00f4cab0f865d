#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agentmem {

/// Base for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A constructor or configuration precondition was violated.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input document. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Scene-graph referential integrity violation (duplicate name, dangling parent, ...).
class GraphError : public Error {
public:
    using Error::Error;
};

class EmbeddingError : public Error {
public:
    enum class Kind { network, timeout, status, malformed, dimension };

    EmbeddingError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

} // namespace agentmem
