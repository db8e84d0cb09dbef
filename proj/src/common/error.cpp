#include "hapi/error.hpp"

#include <fmt/format.h>

#include <utility>

namespace hapi
{
ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
: Error(fmt::format("{}:{}: {}", line, column, what))
, m_line(line)
, m_column(column)
{}

SchemaError::SchemaError(std::string path, const std::string& what)
: Error(fmt::format("{}: {}", path.empty() ? std::string{"<root>"} : path, what))
, m_path(std::move(path))
{}

TraceError::TraceError(const std::string& what)
: Error(what)
{}

TraceError::TraceError(std::string stream, std::uint64_t offset, const std::string& what)
: Error(fmt::format("{} @ byte {}: {}", stream, offset, what))
, m_stream(std::move(stream))
, m_offset(offset)
{}
}  // namespace hapi
