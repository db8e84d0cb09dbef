#include "hapi/workload/workload.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>

namespace hapi::workload
{
namespace
{
struct OpInfo
{
    Op                                   op;
    std::string_view                     name;
    std::string_view                     function;
    std::vector<std::string_view>        required;
    std::vector<std::string_view>        optional;
    bool                                 produces = false;
};

const std::vector<OpInfo>& op_table()
{
    static const std::vector<OpInfo> table = {
        {Op::init, "init", "zeMockInit", {}, {"flags"}, true},
        {Op::get_device_properties, "get_device_properties", "zeMockDeviceGetProperties", {"device"}, {}},
        {Op::mem_alloc, "mem_alloc", "zeMockMemAlloc", {"device", "space", "size"}, {}, true},
        {Op::mem_free, "mem_free", "zeMockMemFree", {"ptr"}, {}},
        {Op::cmdlist_create, "cmdlist_create", "zeMockCommandListCreate", {"device"}, {"tile"}, true},
        {Op::append_memory_copy,
         "append_memory_copy",
         "zeMockCommandListAppendMemoryCopy",
         {"list", "dst", "src", "size"},
         {"signal", "wait"}},
        {Op::append_launch_kernel,
         "append_launch_kernel",
         "zeMockCommandListAppendLaunchKernel",
         {"list", "name", "groups"},
         {"signal"}},
        {Op::cmdlist_close, "cmdlist_close", "zeMockCommandListClose", {"list"}, {}},
        {Op::cmdlist_execute, "cmdlist_execute", "zeMockCommandListExecute", {"list"}, {}},
        {Op::cmdlist_reset, "cmdlist_reset", "zeMockCommandListReset", {"list"}, {}},
        {Op::event_create, "event_create", "zeMockEventCreate", {"device"}, {}, true},
        {Op::event_destroy, "event_destroy", "zeMockEventDestroy", {"event"}, {}},
        {Op::event_host_synchronize, "event_host_synchronize", "zeMockEventHostSynchronize", {"event"}, {"timeout"}},
        {Op::host_compute, "host_compute", "", {}, {"ns", "until_ns"}},
    };
    return table;
}

const OpInfo& info(Op op) { return op_table().at(std::size_t(op)); }

constexpr std::array<std::string_view, 3> injection_names = {"uninit_pnext", "leak_event",
                                                             "no_reset_cmdlist"};

std::optional<std::uint64_t> parse_integer(std::string_view s)
{
    int base = 10;
    if(s.starts_with("0x") || s.starts_with("0X"))
    {
        s.remove_prefix(2);
        base = 16;
    }
    if(s.empty()) return std::nullopt;
    std::uint64_t v   = 0;
    auto [ptr, ec]    = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if(ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

ArgExpr parse_arg(const YAML::Node& n, const std::string& path)
{
    if(n.IsSequence())
    {
        ArgList list;
        for(std::size_t i = 0; i < n.size(); ++i)
            list.push_back(parse_arg(n[i], fmt::format("{}[{}]", path, i)));
        return ArgExpr{std::move(list)};
    }
    if(!n.IsScalar()) throw SchemaError(path, "expected a scalar or a list");
    const auto text = n.Scalar();
    if(text.starts_with('$'))
    {
        if(text.size() == 1) throw SchemaError(path, "empty variable name");
        return ArgExpr{VarRef{text.substr(1)}};
    }
    if(auto v = parse_integer(text)) return ArgExpr{*v};
    return ArgExpr{text};
}

std::uint64_t parse_count(const YAML::Node& n, const std::string& path)
{
    if(!n.IsScalar()) throw SchemaError(path, "expected an integer");
    auto v = parse_integer(n.Scalar());
    if(!v) throw SchemaError(path, fmt::format("'{}' is not a non-negative integer", n.Scalar()));
    return *v;
}

std::vector<Step> parse_steps(const YAML::Node& n, const std::string& path, bool in_parallel);

Step parse_step(const YAML::Node& n, const std::string& path, bool in_parallel)
{
    if(!n.IsMap()) throw SchemaError(path, "a step must be a mapping");
    if(n["steps"])
    {
        BlockStep b;
        const bool rep = bool(n["repeat"]);
        const bool par = bool(n["parallel"]);
        if(rep == par) throw SchemaError(path, "a block needs exactly one of 'repeat' or 'parallel'");
        for(const auto& kv : n)
        {
            const auto key = kv.first.as<std::string>();
            if(key != "steps" && key != "repeat" && key != "parallel")
                throw SchemaError(path + "." + key, "unknown block key");
        }
        b.kind  = par ? BlockStep::Kind::parallel : BlockStep::Kind::repeat;
        b.count = parse_count(par ? n["parallel"] : n["repeat"], path + (par ? ".parallel" : ".repeat"));
        if(par && in_parallel) throw SchemaError(path, "parallel blocks do not nest");
        if(par && b.count == 0) throw SchemaError(path + ".parallel", "needs at least one thread");
        b.steps = parse_steps(n["steps"], path + ".steps", in_parallel || par);
        return Step{std::move(b)};
    }

    CallStep c;
    if(!n["call"]) throw SchemaError(path, "missing 'call'");
    const auto name = n["call"].as<std::string>();
    auto       op   = op_from_string(name);
    if(!op) throw SchemaError(path + ".call", fmt::format("unknown call '{}'", name));
    c.op            = *op;
    const auto& inf = info(c.op);

    for(const auto& kv : n)
    {
        const auto key = kv.first.as<std::string>();
        const auto sub = path + "." + key;
        if(key == "call") continue;
        if(key == "as")
        {
            if(!inf.produces) throw SchemaError(sub, fmt::format("'{}' produces no value", name));
            c.as = kv.second.as<std::string>();
        }
        else if(key == "repeat")
            c.repeat = parse_count(kv.second, sub);
        else if(key == "thread")
        {
            if(!in_parallel) throw SchemaError(sub, "'thread' is only valid inside a parallel block");
            c.thread = static_cast<unsigned>(parse_count(kv.second, sub));
        }
        else if(key == "args")
        {
            if(!kv.second.IsMap()) throw SchemaError(sub, "expected a mapping");
            for(const auto& a : kv.second)
            {
                const auto arg = a.first.as<std::string>();
                const bool known =
                    std::find(inf.required.begin(), inf.required.end(), arg) != inf.required.end() ||
                    std::find(inf.optional.begin(), inf.optional.end(), arg) != inf.optional.end();
                if(!known) throw SchemaError(sub + "." + arg, fmt::format("'{}' takes no argument '{}'", name, arg));
                c.args.emplace(arg, parse_arg(a.second, sub + "." + arg));
            }
        }
        else
            throw SchemaError(sub, "unknown step key");
    }
    for(auto req : inf.required)
        if(!c.args.contains(std::string(req)))
            throw SchemaError(path + ".args." + std::string(req), fmt::format("'{}' needs argument '{}'", name, req));
    if(c.op == Op::host_compute && c.args.contains("ns") == c.args.contains("until_ns"))
        throw SchemaError(path + ".args", "host_compute needs exactly one of 'ns' or 'until_ns'");
    return Step{std::move(c)};
}

std::vector<Step> parse_steps(const YAML::Node& n, const std::string& path, bool in_parallel)
{
    if(!n.IsSequence()) throw SchemaError(path, "expected a list of steps");
    std::vector<Step> steps;
    for(std::size_t i = 0; i < n.size(); ++i)
        steps.push_back(parse_step(n[i], fmt::format("{}[{}]", path, i), in_parallel));
    return steps;
}
}  // namespace

std::string_view to_string(Injection i) { return injection_names.at(std::size_t(i)); }

std::optional<Injection> injection_from_string(std::string_view s)
{
    for(std::size_t i = 0; i < injection_names.size(); ++i)
        if(injection_names[i] == s) return static_cast<Injection>(i);
    return std::nullopt;
}

InjectionSet parse_injections(std::string_view list)
{
    InjectionSet out;
    while(!list.empty())
    {
        const auto comma = list.find(',');
        auto       item  = list.substr(0, comma);
        list             = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
        while(!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while(!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if(item.empty()) continue;
        auto inj = injection_from_string(item);
        if(!inj) throw SchemaError("inject", fmt::format("unknown injection '{}'", item));
        out.insert(*inj);
    }
    return out;
}

std::string_view to_string(Op op) { return info(op).name; }

std::optional<Op> op_from_string(std::string_view s)
{
    for(const auto& e : op_table())
        if(e.name == s) return e.op;
    return std::nullopt;
}

std::string_view function_of(Op op) { return info(op).function; }

Workload parse_workload(std::string_view yaml)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(std::string(yaml));
    } catch(const YAML::Exception& e)
    {
        throw SchemaError("", fmt::format("invalid YAML at line {}: {}", e.mark.line + 1, e.msg));
    }
    if(!root.IsMap()) throw SchemaError("", "a workload must be a mapping");

    Workload w;
    try
    {
        for(const auto& kv : root)
        {
            const auto key = kv.first.as<std::string>();
            if(key == "name")
                w.name = kv.second.as<std::string>();
            else if(key == "seed")
                w.seed = parse_count(kv.second, "seed");
            else if(key == "inject")
            {
                if(kv.second.IsSequence())
                {
                    for(std::size_t i = 0; i < kv.second.size(); ++i)
                    {
                        auto text = kv.second[i].as<std::string>();
                        auto inj  = injection_from_string(text);
                        if(!inj) throw SchemaError(fmt::format("inject[{}]", i), "unknown injection '" + text + "'");
                        w.inject.insert(*inj);
                    }
                }
                else
                    w.inject = parse_injections(kv.second.as<std::string>());
            }
            else if(key == "steps")
                w.steps = parse_steps(kv.second, "steps", false);
            else
                throw SchemaError(key, "unknown workload key");
        }
    } catch(const YAML::Exception& e)
    {
        throw SchemaError("", fmt::format("line {}: {}", e.mark.line + 1, e.msg));
    }
    if(!root["steps"]) throw SchemaError("steps", "missing");
    return w;
}
}  // namespace hapi::workload
