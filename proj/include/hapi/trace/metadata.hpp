#pragma once

#include "hapi/schema/schema.hpp"
#include "hapi/trace/writer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hapi::trace
{
inline constexpr std::string_view metadata_file_name = "metadata.json";
inline constexpr std::string_view trace_format_name  = "hapitrace";

/// Contents of `metadata.json`.
struct TraceMetadata
{
    std::uint32_t           format_version = trace_format_version;
    schema::TracingMode     mode           = schema::TracingMode::standard;
    std::string             clock;  // "virtual" | "monotonic-wall"
    std::string             hostname;
    std::uint64_t           pid             = 0;
    std::uint64_t           buffer_capacity = 0;
    std::string             created_at;
    bool                    complete = false;
    schema::SchemaRegistry  registry;
    std::vector<StreamInfo> streams;
};

std::string   metadata_to_json(const TraceMetadata& meta);
TraceMetadata metadata_from_json(std::string_view text);

TraceMetadata read_metadata(const std::filesystem::path& dir);
}  // namespace hapi::trace
