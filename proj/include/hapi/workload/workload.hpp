#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hapi::workload
{
/// Deliberate misuse the driver can introduce into a run.
enum class Injection : std::uint8_t
{
    uninit_pnext,      // garbage pNext on the first property query
    leak_event,        // skip the first event_destroy
    no_reset_cmdlist,  // skip the first cmdlist_reset
};

using InjectionSet = std::set<Injection>;

std::string_view         to_string(Injection i);
std::optional<Injection> injection_from_string(std::string_view s);
/// Comma-separated list; throws SchemaError naming an unknown entry.
InjectionSet parse_injections(std::string_view list);

/// `$name` reference to a workload variable.
struct VarRef
{
    std::string name;

    bool operator==(const VarRef&) const = default;
};

struct ArgExpr;
using ArgList = std::vector<ArgExpr>;

struct ArgExpr
{
    std::variant<std::uint64_t, std::string, VarRef, ArgList> value;

    bool operator==(const ArgExpr&) const = default;
};

/// The driver operations a step may name.
enum class Op : std::uint8_t
{
    init,
    get_device_properties,
    mem_alloc,
    mem_free,
    cmdlist_create,
    append_memory_copy,
    append_launch_kernel,
    cmdlist_close,
    cmdlist_execute,
    cmdlist_reset,
    event_create,
    event_destroy,
    event_host_synchronize,
    host_compute,
};

std::string_view  to_string(Op op);
std::optional<Op> op_from_string(std::string_view s);
/// Mock API function behind an op; empty for host_compute.
std::string_view function_of(Op op);

struct Step;

struct CallStep
{
    Op                             op = Op::init;
    std::map<std::string, ArgExpr> args;
    std::optional<std::string>     as;
    std::uint64_t                  repeat = 1;
    std::optional<unsigned>        thread;  // only that worker of a parallel block
};

struct BlockStep
{
    enum class Kind : std::uint8_t
    {
        repeat,
        parallel,
    };
    Kind              kind  = Kind::repeat;
    std::uint64_t     count = 1;
    std::vector<Step> steps;
};

struct Step
{
    std::variant<CallStep, BlockStep> body;
};

struct Workload
{
    std::string       name;
    std::uint64_t     seed = 0;
    InjectionSet      inject;
    std::vector<Step> steps;
};

/// Parses and validates a workload document. Errors are SchemaError with a
/// node path such as `steps[9].steps[1].args.size`.
Workload parse_workload(std::string_view yaml);
}  // namespace hapi::workload
