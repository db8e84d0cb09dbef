#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hapi::schema
{
enum class FieldKind : std::uint8_t
{
    u64 = 0,
    i64,
    f64,
    address,
    string,
    blob,
};

enum class FieldOrigin : std::uint8_t
{
    stack_arg,
    deref_in,
    deref_out,
    result,
    profiling,
    telemetry,
};

struct FieldSpec
{
    std::string name;
    FieldKind   kind   = FieldKind::u64;
    FieldOrigin origin = FieldOrigin::stack_arg;

    bool operator==(const FieldSpec&) const = default;
};

enum class EventClass : std::uint8_t
{
    host_entry,
    host_exit,
    device_profiling,
    telemetry_sample,
    meta,
};

/// Tracing level. `standard` is the one spelled "default" on the command line.
enum class TracingMode : std::uint8_t
{
    minimal = 0,
    standard,
    full,
};

class ModeMask
{
public:
    constexpr ModeMask() = default;

    static constexpr ModeMask all()
    {
        ModeMask m;
        m.m_bits = 0b111;
        return m;
    }

    constexpr bool has(TracingMode m) const { return (m_bits & bit(m)) != 0; }
    constexpr void set(TracingMode m) { m_bits |= bit(m); }
    constexpr std::uint8_t bits() const { return m_bits; }

    bool operator==(const ModeMask&) const = default;

private:
    static constexpr std::uint8_t bit(TracingMode m) { return std::uint8_t(1u << unsigned(m)); }

    std::uint8_t m_bits = 0;
};

struct EventSchema
{
    std::uint32_t          id = 0;
    std::string            name;  // "<api>:<event>", e.g. "ze:zeMockMemAlloc_entry"
    EventClass             cls = EventClass::meta;
    std::vector<FieldSpec> fields;
    ModeMask               modes;

    /// Function name for host/profiling schemas ("zeMockMemAlloc"), else empty.
    std::string function() const;
    /// The part of `name` before ':'.
    std::string_view api() const;
    /// Index of a field by name.
    std::optional<std::size_t> field_index(std::string_view field) const;

    bool operator==(const EventSchema&) const = default;
};

enum class Scenario : std::uint8_t
{
    automatic,
    hybrid,
};

struct SchemaRegistry
{
    std::string              api_name;
    std::uint64_t            fingerprint = 0;
    Scenario                 scenario    = Scenario::automatic;
    std::vector<EventSchema> schemas;

    const EventSchema* find(std::string_view name) const;
    const EventSchema* at(std::uint32_t id) const
    {
        return id < schemas.size() ? &schemas[id] : nullptr;
    }

    bool operator==(const SchemaRegistry&) const = default;
};

/// Serialized form used inside `metadata.json`.
std::string    registry_to_json(const SchemaRegistry& reg, int indent = -1);
SchemaRegistry registry_from_json(std::string_view text);

std::string_view           to_string(FieldKind k);
std::string_view           to_string(FieldOrigin o);
std::string_view           to_string(EventClass c);
std::string_view           to_string(TracingMode m);
std::string_view           to_string(Scenario s);
std::optional<FieldKind>   field_kind_from_string(std::string_view s);
std::optional<FieldOrigin> field_origin_from_string(std::string_view s);
std::optional<EventClass>  event_class_from_string(std::string_view s);
std::optional<TracingMode> tracing_mode_from_string(std::string_view s);
std::optional<Scenario>    scenario_from_string(std::string_view s);

// --- telemetry -------------------------------------------------------------

/// The nine device counter rows, in timeline order.
enum class Counter : std::uint8_t
{
    power_domain_0 = 0,
    power_domain_1,
    power_domain_2,
    frequency_domain_0,
    frequency_domain_1,
    compute_engine_tile_0,
    compute_engine_tile_1,
    copy_engine_tile_0,
    copy_engine_tile_1,
};

inline constexpr std::size_t counter_count = 9;

inline constexpr std::array<Counter, counter_count> all_counters = {
    Counter::power_domain_0,        Counter::power_domain_1,        Counter::power_domain_2,
    Counter::frequency_domain_0,    Counter::frequency_domain_1,    Counter::compute_engine_tile_0,
    Counter::compute_engine_tile_1, Counter::copy_engine_tile_0,    Counter::copy_engine_tile_1,
};

/// Timeline track label, e.g. "Power|Domain 0".
std::string_view counter_display_name(Counter c);
/// Schema name, e.g. "telemetry:power_domain_0".
std::string_view counter_schema_name(Counter c);
std::optional<Counter> counter_from_schema_name(std::string_view name);

inline constexpr std::string_view telemetry_api       = "telemetry";
inline constexpr std::string_view sampler_config_name = "hapi:sampler_config";
}  // namespace hapi::schema
