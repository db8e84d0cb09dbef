#pragma once

#include "hapi/model/api_model.hpp"
#include "hapi/schema/schema.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hapi::codegen
{
/// Generates the event registry for `model`.
///
/// Ids: per function (model order) entry then exit, then one profiling schema
/// per `profiled` function (hybrid only), then `hapi:sampler_config`, then
/// the nine telemetry counters. Hybrid throws ModelError naming every
/// profiled-function parameter whose direction is still unknown.
schema::SchemaRegistry build_schema_registry(const model::ApiModel& model, schema::Scenario scenario);

/// Fields of every `<api>:<fn>_profiling` schema, in order.
const std::vector<schema::FieldSpec>& profiling_fields();

enum class CaptureSource : std::uint8_t
{
    argument,      // the parameter value itself
    c_string,      // NUL-terminated text behind a const char*
    deref_value,   // one scalar behind the pointer
    struct_field,  // one field of the struct behind the pointer
    deref_bytes,   // array or blob bytes behind the pointer
    result,        // the return value
};

/// How one payload field is read at the call site.
struct Capture
{
    std::string         field;
    schema::FieldKind   kind   = schema::FieldKind::u64;
    schema::FieldOrigin origin = schema::FieldOrigin::stack_arg;
    CaptureSource       source = CaptureSource::argument;
    std::size_t         param  = 0;  // index into the function's params

    // deref_value / struct_field: where and how wide the value is.
    std::uint64_t     offset = 0;
    std::uint32_t     width  = 8;
    model::ScalarKind scalar = model::ScalarKind::u64;
    std::string       member;  // struct_field: C member name

    // deref_bytes: byte count = length_param value * element_size, or fixed_size.
    std::optional<std::size_t> length_param;
    std::uint64_t              element_size = 1;
    std::uint64_t              fixed_size   = 0;
};

struct FunctionPlan
{
    std::string                  name;
    std::uint32_t                entry_id = 0;
    std::uint32_t                exit_id  = 0;
    std::optional<std::uint32_t> profiling_id;
    std::vector<Capture>         entry;
    std::vector<Capture>         exit;  // starts with the result capture unless void
};

struct CapturePlan
{
    schema::Scenario                                 scenario = schema::Scenario::automatic;
    std::vector<FunctionPlan>                        functions;  // model order
    std::uint32_t                                    sampler_config_id = 0;
    std::array<std::uint32_t, schema::counter_count> telemetry_ids{};

    const FunctionPlan* find(std::string_view name) const;
};

/// Recomputes the capture plan behind `registry`. Throws ModelError when the
/// registry was generated from a different model.
CapturePlan build_capture_plan(const model::ApiModel& model, const schema::SchemaRegistry& registry);
}  // namespace hapi::codegen
