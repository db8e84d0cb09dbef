#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hapi
{
/// Base for every error raised by the toolkit.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed header text. Line and column are 1-based.
class ParseError : public Error
{
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what);

    std::size_t line() const noexcept { return m_line; }
    std::size_t column() const noexcept { return m_column; }

private:
    std::size_t m_line;
    std::size_t m_column;
};

/// A YAML/JSON document that does not match its schema. `path` names the
/// offending node, e.g. `functions[2].params[0].direction`.
class SchemaError : public Error
{
public:
    SchemaError(std::string path, const std::string& what);

    const std::string& path() const noexcept { return m_path; }

private:
    std::string m_path;
};

/// Semantic problems in a model or meta overlay (duplicates, dangling
/// references, conflicts, incomplete models).
class ModelError : public Error
{
public:
    using Error::Error;
};

/// Trace directory or record level failure. `stream` and `offset` locate the
/// bad bytes when known.
class TraceError : public Error
{
public:
    explicit TraceError(const std::string& what);
    TraceError(std::string stream, std::uint64_t offset, const std::string& what);

    const std::string& stream() const noexcept { return m_stream; }
    std::uint64_t      offset() const noexcept { return m_offset; }

private:
    std::string   m_stream;
    std::uint64_t m_offset = 0;
};
}  // namespace hapi
