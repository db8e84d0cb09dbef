#pragma once

#include "hapi/codegen/registry.hpp"
#include "hapi/error.hpp"
#include "hapi/trace/clock.hpp"
#include "hapi/trace/writer.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hapi::codegen
{
/// One call argument. Pointers and handles travel as void*; C strings as
/// const char*; enums as int64_t.
using ArgValue = std::variant<std::uint64_t, std::int64_t, double, void*, const char*>;

/// A device command completed on behalf of a profiled call.
struct ProfilingRecord
{
    std::uint64_t start_ns = 0;
    std::uint64_t end_ns   = 0;
    std::string   kind;  // "memcpy" | "kernel"
    std::string   name;
    std::uint64_t device = 0;
    std::uint64_t tile   = 0;
    std::uint64_t bytes  = 0;
    std::uint64_t groups = 0;

    bool operator==(const ProfilingRecord&) const = default;
};

struct CallResult
{
    std::int64_t                 value = 0;  // raw return bits; ignored for void
    std::vector<ProfilingRecord> profiling;
};

using ImplFn    = std::function<CallResult(std::span<const ArgValue>)>;
using ImplTable = std::map<std::string, ImplFn, std::less<>>;

class UnknownFunction : public Error
{
public:
    explicit UnknownFunction(const std::string& name)
    : Error("dispatch: unknown function '" + name + "'")
    {
    }
};

/// Where a call is traced. A null stream runs the implementation untraced.
struct CallContext
{
    trace::ThreadStream*      stream = nullptr;
    const trace::ClockSource* clock  = nullptr;
};

/// In-process twin of the generated interposer: same captures, same payload
/// bytes, but calls an ImplFn instead of the next symbol.
class DispatchTable
{
public:
    /// Throws ModelError on fingerprint mismatch or a model function with no
    /// implementation.
    DispatchTable(const model::ApiModel& model, const schema::SchemaRegistry& registry,
                  ImplTable impls);

    std::optional<std::size_t> index_of(std::string_view name) const;
    const std::string&         name_of(std::size_t index) const { return m_entries.at(index).plan.name; }
    std::size_t                size() const noexcept { return m_entries.size(); }
    const CapturePlan&         plan() const noexcept { return m_plan; }

    std::int64_t invoke(const CallContext& ctx, std::size_t index,
                        std::span<const ArgValue> args) const;
    /// Throws UnknownFunction for names outside the table.
    std::int64_t invoke(const CallContext& ctx, std::string_view name,
                        std::span<const ArgValue> args) const;

private:
    struct Entry
    {
        FunctionPlan plan;
        ImplFn       impl;
        std::size_t  arity = 0;
    };

    CapturePlan        m_plan;
    std::vector<Entry> m_entries;
};

/// Payload for one capture list, read from live arguments. Exposed for
/// differential tests against the C encoding.
std::vector<trace::FieldValue> capture_payload(const std::vector<Capture>& captures,
                                               std::span<const ArgValue> args,
                                               std::int64_t result = 0);

std::vector<trace::FieldValue> profiling_payload(const ProfilingRecord& rec);
}  // namespace hapi::codegen
