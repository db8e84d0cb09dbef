#include "hapi/trace/metadata.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace hapi::trace
{
std::string metadata_to_json(const TraceMetadata& meta)
{
    nlohmann::ordered_json j;
    j["format"]          = trace_format_name;
    j["format_version"]  = meta.format_version;
    j["mode"]            = schema::to_string(meta.mode);
    j["clock"]           = meta.clock;
    j["hostname"]        = meta.hostname;
    j["pid"]             = meta.pid;
    j["buffer_capacity"] = meta.buffer_capacity;
    j["created_at"]      = meta.created_at;
    j["complete"]        = meta.complete;
    j["registry"]        = nlohmann::ordered_json::parse(schema::registry_to_json(meta.registry));
    auto streams         = nlohmann::ordered_json::array();
    for(const auto& s : meta.streams)
    {
        nlohmann::ordered_json js;
        js["file"]          = s.file;
        js["hostname"]      = s.id.hostname;
        js["pid"]           = s.id.pid;
        js["tid"]           = s.id.tid;
        js["event_count"]   = s.event_count;
        js["dropped_count"] = s.dropped_count;
        streams.push_back(std::move(js));
    }
    j["streams"] = std::move(streams);
    return j.dump(2) + "\n";
}

TraceMetadata metadata_from_json(std::string_view text)
{
    try
    {
        auto j = nlohmann::json::parse(text);
        if(j.at("format").get<std::string>() != trace_format_name)
            throw SchemaError("format", "not a hapitrace directory");
        TraceMetadata m;
        m.format_version = j.at("format_version").get<std::uint32_t>();
        if(m.format_version != trace_format_version)
            throw SchemaError("format_version",
                              fmt::format("unsupported format version {}", m.format_version));
        auto mode = schema::tracing_mode_from_string(j.at("mode").get<std::string>());
        if(!mode) throw SchemaError("mode", "unknown tracing mode");
        m.mode            = *mode;
        m.clock           = j.at("clock").get<std::string>();
        m.hostname        = j.at("hostname").get<std::string>();
        m.pid             = j.at("pid").get<std::uint64_t>();
        m.buffer_capacity = j.at("buffer_capacity").get<std::uint64_t>();
        m.created_at      = j.at("created_at").get<std::string>();
        m.complete        = j.at("complete").get<bool>();
        m.registry        = schema::registry_from_json(j.at("registry").dump());
        for(const auto& js : j.at("streams"))
        {
            StreamInfo s;
            s.file          = js.at("file").get<std::string>();
            s.id.hostname   = js.at("hostname").get<std::string>();
            s.id.pid        = js.at("pid").get<std::uint64_t>();
            s.id.tid        = js.at("tid").get<std::uint64_t>();
            s.event_count   = js.at("event_count").get<std::uint64_t>();
            s.dropped_count = js.at("dropped_count").get<std::uint64_t>();
            m.streams.push_back(std::move(s));
        }
        return m;
    } catch(const nlohmann::json::exception& e)
    {
        throw SchemaError(std::string(metadata_file_name), e.what());
    }
}

TraceMetadata read_metadata(const std::filesystem::path& dir)
{
    std::ifstream in(dir / metadata_file_name);
    if(!in) throw TraceError(fmt::format("{}: no {} found", dir.string(), metadata_file_name));
    std::stringstream ss;
    ss << in.rdbuf();
    return metadata_from_json(ss.str());
}
}  // namespace hapi::trace
