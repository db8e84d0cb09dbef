#include "hapi/schema/schema.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>

namespace hapi::schema
{
namespace
{
constexpr std::array<std::string_view, counter_count> display_names = {
    "Power|Domain 0",        "Power|Domain 1",        "Power|Domain 2",
    "GPU Frequency|Domain 0", "GPU Frequency|Domain 1", "Compute Engine|Tile 0",
    "Compute Engine|Tile 1", "Copy Engine|Tile 0",     "Copy Engine|Tile 1",
};

constexpr std::array<std::string_view, counter_count> schema_names = {
    "telemetry:power_domain_0",        "telemetry:power_domain_1",
    "telemetry:power_domain_2",        "telemetry:frequency_domain_0",
    "telemetry:frequency_domain_1",    "telemetry:compute_engine_tile_0",
    "telemetry:compute_engine_tile_1", "telemetry:copy_engine_tile_0",
    "telemetry:copy_engine_tile_1",
};

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::array<std::string_view, N>& names)
{
    for(std::size_t i = 0; i < N; ++i)
        if(names[i] == s) return static_cast<E>(i);
    return std::nullopt;
}

constexpr std::array<std::string_view, 6> kind_names   = {"u64", "i64", "f64", "address", "string", "blob"};
constexpr std::array<std::string_view, 6> origin_names = {"stack_arg", "deref_in",  "deref_out",
                                                          "result",    "profiling", "telemetry"};
constexpr std::array<std::string_view, 5> class_names  = {"host_entry", "host_exit", "device_profiling",
                                                          "telemetry_sample", "meta"};
constexpr std::array<std::string_view, 3> mode_names     = {"minimal", "default", "full"};
constexpr std::array<std::string_view, 2> scenario_names = {"automatic", "hybrid"};

template <typename E, std::size_t N>
E required_enum(const nlohmann::json& j, const char* key, const std::array<std::string_view, N>& names)
{
    auto text = j.at(key).get<std::string>();
    auto v    = lookup<E>(text, names);
    if(!v) throw SchemaError(key, fmt::format("unknown value '{}'", text));
    return *v;
}
}  // namespace

std::string EventSchema::function() const
{
    if(cls != EventClass::host_entry && cls != EventClass::host_exit &&
       cls != EventClass::device_profiling)
        return {};
    auto colon = name.find(':');
    auto rest  = colon == std::string::npos ? std::string_view(name)
                                            : std::string_view(name).substr(colon + 1);
    auto us    = rest.rfind('_');
    return std::string(us == std::string_view::npos ? rest : rest.substr(0, us));
}

std::string_view EventSchema::api() const
{
    auto colon = name.find(':');
    return colon == std::string::npos ? std::string_view{} : std::string_view(name).substr(0, colon);
}

std::optional<std::size_t> EventSchema::field_index(std::string_view field) const
{
    for(std::size_t i = 0; i < fields.size(); ++i)
        if(fields[i].name == field) return i;
    return std::nullopt;
}

const EventSchema* SchemaRegistry::find(std::string_view name) const
{
    auto it = std::find_if(schemas.begin(), schemas.end(),
                           [&](const EventSchema& s) { return s.name == name; });
    return it == schemas.end() ? nullptr : &*it;
}

std::string_view to_string(FieldKind k) { return kind_names.at(std::size_t(k)); }
std::string_view to_string(FieldOrigin o) { return origin_names.at(std::size_t(o)); }
std::string_view to_string(EventClass c) { return class_names.at(std::size_t(c)); }
std::string_view to_string(TracingMode m) { return mode_names.at(std::size_t(m)); }
std::string_view to_string(Scenario s) { return scenario_names.at(std::size_t(s)); }

std::optional<FieldKind> field_kind_from_string(std::string_view s)
{
    return lookup<FieldKind>(s, kind_names);
}
std::optional<FieldOrigin> field_origin_from_string(std::string_view s)
{
    return lookup<FieldOrigin>(s, origin_names);
}
std::optional<EventClass> event_class_from_string(std::string_view s)
{
    return lookup<EventClass>(s, class_names);
}
std::optional<TracingMode> tracing_mode_from_string(std::string_view s)
{
    return lookup<TracingMode>(s, mode_names);
}
std::optional<Scenario> scenario_from_string(std::string_view s)
{
    return lookup<Scenario>(s, scenario_names);
}

std::string_view counter_display_name(Counter c) { return display_names.at(std::size_t(c)); }
std::string_view counter_schema_name(Counter c) { return schema_names.at(std::size_t(c)); }
std::optional<Counter> counter_from_schema_name(std::string_view name)
{
    return lookup<Counter>(name, schema_names);
}

std::string registry_to_json(const SchemaRegistry& reg, int indent)
{
    nlohmann::json j;
    j["api_name"]    = reg.api_name;
    j["fingerprint"] = fmt::format("{:016x}", reg.fingerprint);
    j["scenario"]    = std::string(to_string(reg.scenario));
    auto& arr        = j["schemas"];
    arr              = nlohmann::json::array();
    for(const auto& s : reg.schemas)
    {
        nlohmann::json js;
        js["id"]    = s.id;
        js["name"]  = s.name;
        js["class"] = std::string(to_string(s.cls));
        auto modes  = nlohmann::json::array();
        for(auto m : {TracingMode::minimal, TracingMode::standard, TracingMode::full})
            if(s.modes.has(m)) modes.push_back(std::string(to_string(m)));
        js["modes"]  = modes;
        auto fields  = nlohmann::json::array();
        for(const auto& f : s.fields)
            fields.push_back({{"name", f.name},
                              {"kind", std::string(to_string(f.kind))},
                              {"origin", std::string(to_string(f.origin))}});
        js["fields"] = fields;
        arr.push_back(std::move(js));
    }
    return j.dump(indent);
}

SchemaRegistry registry_from_json(std::string_view text)
{
    try
    {
        auto           j = nlohmann::json::parse(text);
        SchemaRegistry reg;
        reg.api_name    = j.at("api_name").get<std::string>();
        reg.fingerprint = std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16);
        reg.scenario    = required_enum<Scenario>(j, "scenario", scenario_names);
        for(const auto& js : j.at("schemas"))
        {
            EventSchema s;
            s.id   = js.at("id").get<std::uint32_t>();
            s.name = js.at("name").get<std::string>();
            s.cls  = required_enum<EventClass>(js, "class", class_names);
            for(const auto& m : js.at("modes"))
            {
                auto mode = tracing_mode_from_string(m.get<std::string>());
                if(!mode) throw SchemaError("modes", "unknown tracing mode");
                s.modes.set(*mode);
            }
            for(const auto& jf : js.at("fields"))
            {
                FieldSpec f;
                f.name   = jf.at("name").get<std::string>();
                f.kind   = required_enum<FieldKind>(jf, "kind", kind_names);
                f.origin = required_enum<FieldOrigin>(jf, "origin", origin_names);
                s.fields.push_back(std::move(f));
            }
            if(s.id != reg.schemas.size())
                throw SchemaError("schemas", fmt::format("schema ids must be dense, got {}", s.id));
            reg.schemas.push_back(std::move(s));
        }
        return reg;
    } catch(const nlohmann::json::exception& e)
    {
        throw SchemaError("registry", e.what());
    }
}
}  // namespace hapi::schema
