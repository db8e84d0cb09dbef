#include "hapi/error.hpp"
#include "hapi/model/api_model.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <initializer_list>
#include <map>
#include <set>

namespace hapi::model
{
namespace
{
std::string child(const std::string& path, std::string_view key)
{
    return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

std::string index(const std::string& path, std::size_t i)
{
    return fmt::format("{}[{}]", path, i);
}

void require_map(const YAML::Node& n, const std::string& path,
                 std::initializer_list<std::string_view> allowed)
{
    if(!n.IsMap()) throw SchemaError(path, "expected a mapping");
    for(const auto& kv : n)
    {
        auto key = kv.first.as<std::string>();
        bool ok  = false;
        for(auto a : allowed) ok = ok || a == key;
        if(!ok) throw SchemaError(child(path, key), "unknown key");
    }
}

YAML::Node optional_seq(const YAML::Node& parent, std::string_view key, const std::string& path)
{
    YAML::Node n = parent[std::string(key)];
    if(!n || n.IsNull()) return {};
    if(!n.IsSequence()) throw SchemaError(child(path, key), "expected a sequence");
    return n;
}

std::string scalar_string(const YAML::Node& n, const std::string& path)
{
    if(!n || !n.IsScalar()) throw SchemaError(path, "expected a scalar");
    return n.as<std::string>();
}

std::string required_string(const YAML::Node& parent, std::string_view key, const std::string& path)
{
    YAML::Node n = parent[std::string(key)];
    if(!n) throw SchemaError(child(path, key), "missing required key");
    return scalar_string(n, child(path, key));
}

template <typename T>
T scalar_as(const YAML::Node& n, const std::string& path, std::string_view what)
{
    if(!n || !n.IsScalar()) throw SchemaError(path, fmt::format("expected {}", what));
    try
    {
        return n.as<T>();
    } catch(const YAML::Exception&)
    {
        throw SchemaError(path, fmt::format("expected {}", what));
    }
}

FunctionAttrs parse_attrs(const YAML::Node& parent, const std::string& path)
{
    FunctionAttrs attrs;
    auto          seq = optional_seq(parent, "attrs", path);
    for(std::size_t i = 0; seq && i < seq.size(); ++i)
    {
        auto p    = index(child(path, "attrs"), i);
        auto name = scalar_string(seq[i], p);
        auto a    = attr_from_string(name);
        if(!a) throw SchemaError(p, fmt::format("unknown attribute '{}'", name));
        attrs.set(*a);
    }
    return attrs;
}

DerefSpec parse_deref(const YAML::Node& n, const std::string& path)
{
    require_map(n, path, {"kind", "length", "unit", "size"});
    DerefSpec d;
    auto      kind = required_string(n, "kind", path);
    if(kind == "scalar")
        d.kind = DerefKind::scalar;
    else if(kind == "array")
    {
        d.kind         = DerefKind::array;
        d.length_param = required_string(n, "length", path);
        if(n["unit"])
        {
            auto unit = scalar_string(n["unit"], child(path, "unit"));
            if(unit != "bytes" && unit != "elements")
                throw SchemaError(child(path, "unit"), "expected 'bytes' or 'elements'");
            d.element_count = unit == "elements";
        }
    }
    else if(kind == "blob")
    {
        d.kind = DerefKind::blob;
        if(!n["size"]) throw SchemaError(child(path, "size"), "missing required key");
        d.blob_size = scalar_as<std::uint64_t>(n["size"], child(path, "size"), "a byte count");
    }
    else
        throw SchemaError(child(path, "kind"), fmt::format("unknown deref kind '{}'", kind));
    if(d.kind != DerefKind::array && (n["length"] || n["unit"]))
        throw SchemaError(path, "length/unit only apply to array derefs");
    if(d.kind != DerefKind::blob && n["size"])
        throw SchemaError(child(path, "size"), "size only applies to blob derefs");
    return d;
}

Direction parse_direction(const YAML::Node& n, const std::string& path)
{
    auto text = scalar_string(n, path);
    auto d    = direction_from_string(text);
    if(!d) throw SchemaError(path, fmt::format("unknown direction '{}'", text));
    return *d;
}

// Re-raises model-level violations as schema errors rooted at `path`.
template <typename Fn>
void check_at(const std::string& path, Fn&& fn)
{
    try
    {
        fn();
    } catch(const ModelError& e)
    {
        throw SchemaError(path, e.what());
    }
}

YAML::Node parse_document(std::string_view document)
{
    try
    {
        return YAML::Load(std::string(document));
    } catch(const YAML::ParserException& e)
    {
        throw SchemaError("", fmt::format("YAML syntax error at line {}: {}", e.mark.line + 1, e.msg));
    }
}

void emit_deref(YAML::Emitter& out, const DerefSpec& d)
{
    out << YAML::Flow << YAML::BeginMap;
    switch(d.kind)
    {
        case DerefKind::scalar: out << YAML::Key << "kind" << YAML::Value << "scalar"; break;
        case DerefKind::array:
            out << YAML::Key << "kind" << YAML::Value << "array";
            out << YAML::Key << "length" << YAML::Value << d.length_param;
            out << YAML::Key << "unit" << YAML::Value << (d.element_count ? "elements" : "bytes");
            break;
        case DerefKind::blob:
            out << YAML::Key << "kind" << YAML::Value << "blob";
            out << YAML::Key << "size" << YAML::Value << d.blob_size;
            break;
    }
    out << YAML::EndMap;
}
}  // namespace

ApiModel load_api_model_yaml(std::string_view document)
{
    YAML::Node root = parse_document(document);
    require_map(root, "", {"api_name", "version", "handles", "enums", "structs", "functions"});

    ApiModel model;
    model.api_name = required_string(root, "api_name", "");
    model.version  = root["version"] ? scalar_string(root["version"], "version") : std::string{};

    if(auto seq = optional_seq(root, "handles", ""))
        for(std::size_t i = 0; i < seq.size(); ++i)
            model.handles.push_back(scalar_string(seq[i], index("handles", i)));

    if(auto seq = optional_seq(root, "enums", ""))
    {
        for(std::size_t i = 0; i < seq.size(); ++i)
        {
            auto path = index("enums", i);
            require_map(seq[i], path, {"name", "values"});
            EnumDef def{required_string(seq[i], "name", path), {}};
            auto    vals = optional_seq(seq[i], "values", path);
            for(std::size_t j = 0; vals && j < vals.size(); ++j)
            {
                auto vp = index(child(path, "values"), j);
                require_map(vals[j], vp, {"name", "value"});
                if(!vals[j]["value"]) throw SchemaError(child(vp, "value"), "missing required key");
                def.constants.push_back(
                    {required_string(vals[j], "name", vp),
                     scalar_as<std::int64_t>(vals[j]["value"], child(vp, "value"), "an integer")});
            }
            model.enums.push_back(std::move(def));
        }
    }

    if(auto seq = optional_seq(root, "structs", ""))
    {
        for(std::size_t i = 0; i < seq.size(); ++i)
        {
            auto path = index("structs", i);
            require_map(seq[i], path, {"name", "fields"});
            StructDef def{required_string(seq[i], "name", path), {}};
            auto      fields = optional_seq(seq[i], "fields", path);
            for(std::size_t j = 0; fields && j < fields.size(); ++j)
            {
                auto fp = index(child(path, "fields"), j);
                require_map(fields[j], fp, {"name", "kind", "width"});
                StructField f;
                f.name    = required_string(fields[j], "name", fp);
                auto kind = required_string(fields[j], "kind", fp);
                auto k    = scalar_kind_from_string(kind);
                if(!k) throw SchemaError(child(fp, "kind"), fmt::format("unknown kind '{}'", kind));
                f.kind = *k;
                if(!fields[j]["width"]) throw SchemaError(child(fp, "width"), "missing required key");
                f.width = scalar_as<std::uint32_t>(fields[j]["width"], child(fp, "width"), "a width");
                def.fields.push_back(std::move(f));
            }
            model.structs.push_back(std::move(def));
        }
    }

    if(auto seq = optional_seq(root, "functions", ""))
    {
        for(std::size_t i = 0; i < seq.size(); ++i)
        {
            auto path = index("functions", i);
            require_map(seq[i], path, {"name", "return", "params", "attrs"});
            FunctionDecl fn;
            fn.name        = required_string(seq[i], "name", path);
            fn.return_type = seq[i]["return"] ? scalar_string(seq[i]["return"], child(path, "return"))
                                              : std::string{"void"};
            fn.attrs       = parse_attrs(seq[i], path);
            auto params    = optional_seq(seq[i], "params", path);
            for(std::size_t j = 0; params && j < params.size(); ++j)
            {
                auto pp = index(child(path, "params"), j);
                require_map(params[j], pp, {"name", "type", "direction", "deref"});
                ParamDecl p;
                p.name   = required_string(params[j], "name", pp);
                p.c_type = required_string(params[j], "type", pp);
                if(params[j]["direction"])
                    p.direction = parse_direction(params[j]["direction"], child(pp, "direction"));
                if(params[j]["deref"]) p.deref = parse_deref(params[j]["deref"], child(pp, "deref"));
                fn.params.push_back(std::move(p));
            }
            model.functions.push_back(std::move(fn));
        }
    }

    // Per-parameter checks carry precise paths; the whole-model pass catches the rest.
    for(std::size_t i = 0; i < model.functions.size(); ++i)
    {
        auto& fn = model.functions[i];
        check_at(index("functions", i) + ".return", [&] { resolve_type(model, fn.return_type); });
        for(std::size_t j = 0; j < fn.params.size(); ++j)
        {
            auto&    p  = fn.params[j];
            auto     pp = index(child(index("functions", i), "params"), j);
            TypeInfo t;
            check_at(child(pp, "type"), [&] { t = resolve_type(model, p.c_type); });
            p.is_handle = t.category == TypeInfo::Category::handle && t.pointer_depth == 0;
            if(t.pointer_depth == 0)
            {
                if(p.direction == Direction::out || p.direction == Direction::inout)
                    throw SchemaError(child(pp, "direction"),
                                      fmt::format("direction '{}' requires a pointer parameter",
                                                  to_string(p.direction)));
                if(p.deref)
                    throw SchemaError(child(pp, "deref"), "deref requires a pointer parameter");
            }
        }
    }
    check_at("", [&] { validate_model(model); });
    return model;
}

std::string to_yaml(const ApiModel& model)
{
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "api_name" << YAML::Value << YAML::DoubleQuoted << model.api_name;
    out << YAML::Key << "version" << YAML::Value << YAML::DoubleQuoted << model.version;

    out << YAML::Key << "handles" << YAML::Value << YAML::BeginSeq;
    for(const auto& h : model.handles) out << h;
    out << YAML::EndSeq;

    out << YAML::Key << "enums" << YAML::Value << YAML::BeginSeq;
    for(const auto& e : model.enums)
    {
        out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << e.name;
        out << YAML::Key << "values" << YAML::Value << YAML::BeginSeq;
        for(const auto& c : e.constants)
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << c.name
                << YAML::Key << "value" << YAML::Value << c.value << YAML::EndMap;
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "structs" << YAML::Value << YAML::BeginSeq;
    for(const auto& s : model.structs)
    {
        out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << s.name;
        out << YAML::Key << "fields" << YAML::Value << YAML::BeginSeq;
        for(const auto& f : s.fields)
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << f.name
                << YAML::Key << "kind" << YAML::Value << std::string(to_string(f.kind))
                << YAML::Key << "width" << YAML::Value << f.width << YAML::EndMap;
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "functions" << YAML::Value << YAML::BeginSeq;
    for(const auto& fn : model.functions)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << fn.name;
        out << YAML::Key << "return" << YAML::Value << fn.return_type;
        if(!fn.attrs.empty())
        {
            out << YAML::Key << "attrs" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for(auto a : all_function_attrs)
                if(fn.attrs.has(a)) out << std::string(to_string(a));
            out << YAML::EndSeq;
        }
        out << YAML::Key << "params" << YAML::Value << YAML::BeginSeq;
        for(const auto& p : fn.params)
        {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << p.name;
            out << YAML::Key << "type" << YAML::Value << p.c_type;
            if(p.direction != Direction::unknown)
                out << YAML::Key << "direction" << YAML::Value << std::string(to_string(p.direction));
            if(p.deref)
            {
                out << YAML::Key << "deref" << YAML::Value;
                emit_deref(out, *p.deref);
            }
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

MetaParams load_meta_params_yaml(std::string_view document)
{
    YAML::Node root = parse_document(document);
    MetaParams meta;
    if(!root || root.IsNull()) return meta;
    require_map(root, "", {"functions"});
    auto seq = optional_seq(root, "functions", "");
    for(std::size_t i = 0; seq && i < seq.size(); ++i)
    {
        auto path = index("functions", i);
        require_map(seq[i], path, {"name", "attrs", "params"});
        FunctionOverlay ov;
        ov.name     = required_string(seq[i], "name", path);
        ov.attrs    = parse_attrs(seq[i], path);
        auto params = optional_seq(seq[i], "params", path);
        for(std::size_t j = 0; params && j < params.size(); ++j)
        {
            auto pp = index(child(path, "params"), j);
            require_map(params[j], pp, {"name", "direction", "deref"});
            ParamOverlay po;
            po.name = required_string(params[j], "name", pp);
            if(params[j]["direction"])
                po.direction = parse_direction(params[j]["direction"], child(pp, "direction"));
            if(params[j]["deref"]) po.deref = parse_deref(params[j]["deref"], child(pp, "deref"));
            ov.params.push_back(std::move(po));
        }
        meta.functions.push_back(std::move(ov));
    }
    return meta;
}

ApiModel apply_meta_params(const ApiModel& model, const MetaParams& meta)
{
    ApiModel out = model;
    struct Applied
    {
        std::optional<Direction> direction;
        std::optional<DerefSpec> deref;
    };
    std::map<std::pair<std::string, std::string>, Applied> applied;
    std::set<std::string>                                  touched;

    for(const auto& ov : meta.functions)
    {
        auto it = std::find_if(out.functions.begin(), out.functions.end(),
                               [&](const FunctionDecl& f) { return f.name == ov.name; });
        if(it == out.functions.end())
            throw ModelError(fmt::format("meta overlay references unknown function '{}'", ov.name));
        touched.insert(ov.name);
        it->attrs.merge(ov.attrs);
        for(const auto& po : ov.params)
        {
            auto pit = std::find_if(it->params.begin(), it->params.end(),
                                    [&](const ParamDecl& p) { return p.name == po.name; });
            if(pit == it->params.end())
                throw ModelError(fmt::format("meta overlay references unknown parameter '{}.{}'",
                                             ov.name, po.name));
            auto& slot = applied[{ov.name, po.name}];
            if(po.direction)
            {
                if(slot.direction && *slot.direction != *po.direction)
                    throw ModelError(fmt::format("conflicting direction overlays for '{}.{}'",
                                                 ov.name, po.name));
                slot.direction = po.direction;
                pit->direction = *po.direction;
            }
            if(po.deref)
            {
                if(slot.deref && *slot.deref != *po.deref)
                    throw ModelError(
                        fmt::format("conflicting deref overlays for '{}.{}'", ov.name, po.name));
                slot.deref = po.deref;
                pit->deref = po.deref;
            }
        }
    }

    for(auto& fn : out.functions)
    {
        if(!touched.count(fn.name)) continue;
        for(auto& p : fn.params)
        {
            if(p.direction != Direction::unknown) continue;
            auto t = resolve_type(out, p.c_type);
            if(t.pointer_depth == 0) p.direction = Direction::in;
        }
    }
    validate_model(out);
    return out;
}
}  // namespace hapi::model
