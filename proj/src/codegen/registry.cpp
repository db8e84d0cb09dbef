#include "hapi/codegen/registry.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace hapi::codegen
{
namespace
{
using model::ApiModel;
using model::Direction;
using model::FunctionDecl;
using model::ScalarKind;
using model::TypeInfo;
using schema::EventClass;
using schema::FieldKind;
using schema::FieldOrigin;
using schema::ModeMask;
using schema::Scenario;
using schema::TracingMode;

FieldKind field_kind(ScalarKind k)
{
    switch(k)
    {
        case ScalarKind::u64: return FieldKind::u64;
        case ScalarKind::i64: return FieldKind::i64;
        case ScalarKind::f64: return FieldKind::f64;
        case ScalarKind::address: return FieldKind::address;
    }
    return FieldKind::u64;
}

/// Kind and width of a value of type `t` (not dereferenced).
std::pair<ScalarKind, std::uint32_t> value_shape(const TypeInfo& t)
{
    if(t.pointer_depth > 0 || t.category == TypeInfo::Category::handle)
        return {ScalarKind::address, 8};
    return {t.scalar_kind, t.width};
}

/// The type one pointer level down.
TypeInfo pointee(TypeInfo t)
{
    --t.pointer_depth;
    if(t.pointer_depth > 0) t.is_const = false;
    return t;
}

bool wants_deref_in(Direction d) { return d == Direction::in || d == Direction::inout; }
bool wants_deref_out(Direction d) { return d == Direction::out || d == Direction::inout; }

void add_deref(const ApiModel& model, const FunctionDecl& fn, std::size_t pi, FieldOrigin origin,
               std::vector<Capture>& out)
{
    const auto& p   = fn.params[pi];
    const auto& d   = *p.deref;
    const auto  t   = model::resolve_type(model, p.c_type);
    const bool  in  = origin == FieldOrigin::deref_in;
    Capture     cap;
    cap.origin = origin;
    cap.param  = pi;

    if(d.kind == model::DerefKind::array || d.kind == model::DerefKind::blob)
    {
        cap.field  = in ? p.name + "_vals" : p.name;
        cap.kind   = FieldKind::blob;
        cap.source = CaptureSource::deref_bytes;
        if(d.kind == model::DerefKind::array)
        {
            const auto it = std::find_if(fn.params.begin(), fn.params.end(),
                                         [&](const model::ParamDecl& q) { return q.name == d.length_param; });
            cap.length_param = static_cast<std::size_t>(it - fn.params.begin());
            cap.element_size = d.element_count ? model::pointee_size(model, p.c_type) : 1;
        }
        else
            cap.fixed_size = d.blob_size;
        out.push_back(std::move(cap));
        return;
    }

    const auto pt = pointee(t);
    if(pt.pointer_depth == 0 && pt.category == TypeInfo::Category::structure)
    {
        const auto* def     = model.find_struct(pt.base);
        const auto  offsets = model::struct_offsets(*def);
        for(std::size_t i = 0; i < def->fields.size(); ++i)
        {
            const auto& f = def->fields[i];
            Capture     c = cap;
            c.field       = p.name + "_" + f.name;
            c.kind        = field_kind(f.kind);
            c.source      = CaptureSource::struct_field;
            c.offset      = offsets[i];
            c.width       = f.width;
            c.scalar      = f.kind;
            c.member      = f.name;
            out.push_back(std::move(c));
        }
        return;
    }
    auto [kind, width] = value_shape(pt);
    cap.field          = in ? p.name + "_val" : p.name;
    cap.kind           = field_kind(kind);
    cap.source         = CaptureSource::deref_value;
    cap.width          = width;
    cap.scalar         = kind;
    out.push_back(std::move(cap));
}

void check_unique(const std::string& fn, std::string_view which, const std::vector<Capture>& caps)
{
    std::set<std::string_view> seen;
    for(const auto& c : caps)
        if(!seen.insert(c.field).second)
            throw ModelError(fmt::format("function '{}': {} field name '{}' is not unique", fn,
                                         which, c.field));
}

FunctionPlan plan_function(const ApiModel& model, const FunctionDecl& fn, Scenario scenario)
{
    const bool   hybrid = scenario == Scenario::hybrid;
    FunctionPlan plan;
    plan.name = fn.name;

    for(std::size_t i = 0; i < fn.params.size(); ++i)
    {
        const auto& p = fn.params[i];
        const auto  t = model::resolve_type(model, p.c_type);
        Capture     c;
        c.field  = p.name;
        c.origin = FieldOrigin::stack_arg;
        c.param  = i;
        if(hybrid && t.is_c_string() && p.direction != Direction::out)
        {
            c.kind   = FieldKind::string;
            c.source = CaptureSource::c_string;
        }
        else
        {
            auto [kind, width] = value_shape(t);
            c.kind             = field_kind(kind);
            c.scalar           = kind;
            c.width            = width;
        }
        plan.entry.push_back(std::move(c));
        if(hybrid && p.deref && wants_deref_in(p.direction))
            add_deref(model, fn, i, FieldOrigin::deref_in, plan.entry);
    }

    const auto rt = model::resolve_type(model, fn.return_type);
    if(!(rt.category == TypeInfo::Category::void_type && rt.pointer_depth == 0))
    {
        auto [kind, width] = value_shape(rt);
        Capture c;
        c.field  = "result";
        c.kind   = field_kind(kind);
        c.origin = FieldOrigin::result;
        c.source = CaptureSource::result;
        c.scalar = kind;
        c.width  = width;
        plan.exit.push_back(std::move(c));
    }
    if(hybrid)
        for(std::size_t i = 0; i < fn.params.size(); ++i)
            if(fn.params[i].deref && wants_deref_out(fn.params[i].direction))
                add_deref(model, fn, i, FieldOrigin::deref_out, plan.exit);

    check_unique(fn.name, "entry", plan.entry);
    check_unique(fn.name, "exit", plan.exit);
    return plan;
}

ModeMask host_modes(const FunctionDecl& fn)
{
    ModeMask m;
    m.set(TracingMode::full);
    if(!fn.attrs.has(model::FunctionAttr::default_excluded)) m.set(TracingMode::standard);
    if(fn.attrs.has(model::FunctionAttr::minimal_included)) m.set(TracingMode::minimal);
    return m;
}

std::vector<schema::FieldSpec> to_fields(const std::vector<Capture>& caps)
{
    std::vector<schema::FieldSpec> out;
    out.reserve(caps.size());
    for(const auto& c : caps) out.push_back({c.field, c.kind, c.origin});
    return out;
}

struct Generated
{
    schema::SchemaRegistry registry;
    CapturePlan            plan;
};

Generated generate(const ApiModel& model, Scenario scenario)
{
    model::validate_model(model);
    if(scenario == Scenario::hybrid)
    {
        std::vector<std::string> offenders;
        for(const auto& fn : model.functions)
        {
            if(!fn.attrs.has(model::FunctionAttr::profiled)) continue;
            for(const auto& p : fn.params)
                if(p.direction == Direction::unknown) offenders.push_back(fn.name + "." + p.name);
        }
        if(!offenders.empty())
            throw ModelError(fmt::format("incomplete model for hybrid generation: unknown direction on {}",
                                         fmt::join(offenders, ", ")));
    }

    Generated g;
    auto&     reg   = g.registry;
    reg.api_name    = model.api_name;
    reg.fingerprint = model::model_fingerprint(model);
    reg.scenario    = scenario;
    g.plan.scenario = scenario;

    auto add = [&](std::string name, EventClass cls, std::vector<schema::FieldSpec> fields,
                   ModeMask modes) {
        schema::EventSchema s;
        s.id     = static_cast<std::uint32_t>(reg.schemas.size());
        s.name   = std::move(name);
        s.cls    = cls;
        s.fields = std::move(fields);
        s.modes  = modes;
        reg.schemas.push_back(std::move(s));
        return reg.schemas.back().id;
    };

    for(const auto& fn : model.functions)
    {
        auto plan     = plan_function(model, fn, scenario);
        const auto m  = host_modes(fn);
        plan.entry_id = add(fmt::format("{}:{}_entry", model.api_name, fn.name), EventClass::host_entry,
                            to_fields(plan.entry), m);
        plan.exit_id  = add(fmt::format("{}:{}_exit", model.api_name, fn.name), EventClass::host_exit,
                            to_fields(plan.exit), m);
        g.plan.functions.push_back(std::move(plan));
    }
    if(scenario == Scenario::hybrid)
    {
        for(std::size_t i = 0; i < model.functions.size(); ++i)
        {
            const auto& fn = model.functions[i];
            if(!fn.attrs.has(model::FunctionAttr::profiled)) continue;
            g.plan.functions[i].profiling_id =
                add(fmt::format("{}:{}_profiling", model.api_name, fn.name),
                    EventClass::device_profiling, profiling_fields(), ModeMask::all());
        }
    }
    g.plan.sampler_config_id =
        add(std::string(schema::sampler_config_name), EventClass::meta,
            {{"device", FieldKind::u64, FieldOrigin::telemetry},
             {"period_ns", FieldKind::u64, FieldOrigin::telemetry},
             {"tiles", FieldKind::u64, FieldOrigin::telemetry}},
            ModeMask::all());
    for(std::size_t i = 0; i < schema::counter_count; ++i)
        g.plan.telemetry_ids[i] =
            add(std::string(schema::counter_schema_name(schema::all_counters[i])),
                EventClass::telemetry_sample,
                {{"device", FieldKind::u64, FieldOrigin::telemetry},
                 {"value", FieldKind::f64, FieldOrigin::telemetry}},
                ModeMask::all());
    return g;
}
}  // namespace

const std::vector<schema::FieldSpec>& profiling_fields()
{
    static const std::vector<schema::FieldSpec> fields = {
        {"device_start_ns", FieldKind::u64, FieldOrigin::profiling},
        {"device_end_ns", FieldKind::u64, FieldOrigin::profiling},
        {"command_kind", FieldKind::string, FieldOrigin::profiling},
        {"command_name", FieldKind::string, FieldOrigin::profiling},
        {"device", FieldKind::u64, FieldOrigin::profiling},
        {"tile", FieldKind::u64, FieldOrigin::profiling},
        {"bytes", FieldKind::u64, FieldOrigin::profiling},
        {"groups", FieldKind::u64, FieldOrigin::profiling},
    };
    return fields;
}

const FunctionPlan* CapturePlan::find(std::string_view name) const
{
    auto it = std::find_if(functions.begin(), functions.end(),
                           [&](const FunctionPlan& f) { return f.name == name; });
    return it == functions.end() ? nullptr : &*it;
}

schema::SchemaRegistry build_schema_registry(const ApiModel& model, Scenario scenario)
{
    return generate(model, scenario).registry;
}

CapturePlan build_capture_plan(const ApiModel& model, const schema::SchemaRegistry& registry)
{
    if(model::model_fingerprint(model) != registry.fingerprint)
        throw ModelError(fmt::format("registry fingerprint {:016x} does not match model fingerprint {:016x}",
                                     registry.fingerprint, model::model_fingerprint(model)));
    auto g = generate(model, registry.scenario);
    if(g.registry != registry)
        throw ModelError("registry does not match the one generated from this model");
    return std::move(g.plan);
}
}  // namespace hapi::codegen
