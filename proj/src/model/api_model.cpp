#include "hapi/model/api_model.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

namespace hapi::model
{
namespace
{
struct ScalarEntry
{
    std::string_view name;
    ScalarKind       kind;
    std::uint32_t    width;
};

// Integer signedness only matters for sign extension when reading memory.
constexpr std::array<ScalarEntry, 22> scalar_table = {{
    {"char", ScalarKind::i64, 1},        {"bool", ScalarKind::u64, 1},
    {"int8_t", ScalarKind::i64, 1},      {"uint8_t", ScalarKind::u64, 1},
    {"int16_t", ScalarKind::i64, 2},     {"uint16_t", ScalarKind::u64, 2},
    {"int32_t", ScalarKind::i64, 4},     {"uint32_t", ScalarKind::u64, 4},
    {"int64_t", ScalarKind::i64, 8},     {"uint64_t", ScalarKind::u64, 8},
    {"int", ScalarKind::i64, 4},         {"unsigned", ScalarKind::u64, 4},
    {"unsigned int", ScalarKind::u64, 4}, {"long", ScalarKind::i64, 8},
    {"unsigned long", ScalarKind::u64, 8}, {"size_t", ScalarKind::u64, 8},
    {"ssize_t", ScalarKind::i64, 8},     {"uintptr_t", ScalarKind::u64, 8},
    {"intptr_t", ScalarKind::i64, 8},    {"ptrdiff_t", ScalarKind::i64, 8},
    {"float", ScalarKind::f64, 4},       {"double", ScalarKind::f64, 8},
}};

template <typename T>
const T* find_named(const std::vector<T>& items, std::string_view name)
{
    auto it = std::find_if(items.begin(), items.end(), [&](const T& v) { return v.name == name; });
    return it == items.end() ? nullptr : &*it;
}

bool is_integral(const TypeInfo& t)
{
    if(t.pointer_depth != 0) return false;
    if(t.category == TypeInfo::Category::enumeration) return true;
    return t.category == TypeInfo::Category::scalar && t.scalar_kind != ScalarKind::f64;
}
}  // namespace

const ParamDecl* FunctionDecl::find_param(std::string_view pname) const
{
    return find_named(params, pname);
}

const FunctionDecl* ApiModel::find_function(std::string_view name) const
{
    return find_named(functions, name);
}

const StructDef* ApiModel::find_struct(std::string_view name) const
{
    return find_named(structs, name);
}

const EnumDef* ApiModel::find_enum(std::string_view name) const
{
    return find_named(enums, name);
}

bool ApiModel::is_handle_type(std::string_view name) const
{
    return std::find(handles.begin(), handles.end(), name) != handles.end();
}

TypeInfo resolve_type(const ApiModel& model, std::string_view c_type)
{
    TypeInfo info;
    std::string words;
    {
        std::string cleaned;
        for(char c : c_type)
        {
            if(c == '*')
            {
                ++info.pointer_depth;
                cleaned += ' ';
            }
            else
                cleaned += c;
        }
        std::istringstream in(cleaned);
        std::string        w;
        while(in >> w)
        {
            if(w == "const")
            {
                info.is_const = true;
                continue;
            }
            if(!words.empty()) words += ' ';
            words += w;
        }
    }
    info.base = words;
    if(words.empty()) throw ModelError(fmt::format("empty type name in '{}'", c_type));

    if(words == "void")
    {
        info.category = TypeInfo::Category::void_type;
        info.width    = 0;
        return info;
    }
    for(const auto& e : scalar_table)
    {
        if(e.name == words)
        {
            info.category    = TypeInfo::Category::scalar;
            info.scalar_kind = e.kind;
            info.width       = e.width;
            return info;
        }
    }
    if(model.is_handle_type(words))
    {
        info.category    = TypeInfo::Category::handle;
        info.scalar_kind = ScalarKind::address;
        info.width       = 8;
        return info;
    }
    if(model.find_enum(words))
    {
        info.category    = TypeInfo::Category::enumeration;
        info.scalar_kind = ScalarKind::i64;
        info.width       = 4;
        return info;
    }
    if(const auto* s = model.find_struct(words))
    {
        info.category = TypeInfo::Category::structure;
        info.width    = static_cast<std::uint32_t>(struct_size(*s));
        return info;
    }
    throw ModelError(fmt::format("unresolvable type name '{}'", words));
}

std::vector<std::uint64_t> struct_offsets(const StructDef& def)
{
    std::vector<std::uint64_t> offsets;
    std::uint64_t              at = 0;
    for(const auto& f : def.fields)
    {
        const std::uint64_t align = f.width;
        at                        = (at + align - 1) / align * align;
        offsets.push_back(at);
        at += f.width;
    }
    return offsets;
}

std::uint64_t struct_size(const StructDef& def)
{
    std::uint64_t max_align = 1;
    std::uint64_t end       = 0;
    auto          offsets   = struct_offsets(def);
    for(std::size_t i = 0; i < def.fields.size(); ++i)
    {
        max_align = std::max<std::uint64_t>(max_align, def.fields[i].width);
        end       = offsets[i] + def.fields[i].width;
    }
    return (end + max_align - 1) / max_align * max_align;
}

std::uint64_t pointee_size(const ApiModel& model, std::string_view c_type)
{
    auto t = resolve_type(model, c_type);
    if(t.pointer_depth == 0) throw ModelError(fmt::format("'{}' is not a pointer type", c_type));
    if(t.pointer_depth > 1) return 8;
    if(t.category == TypeInfo::Category::void_type) return 1;
    return t.width;
}

void validate_model(const ApiModel& model)
{
    std::set<std::string> seen_types;
    auto                  claim_type = [&](const std::string& name, std::string_view what) {
        if(!seen_types.insert(name).second)
            throw ModelError(fmt::format("duplicate type name '{}' ({})", name, what));
    };
    for(const auto& h : model.handles) claim_type(h, "handle");
    for(const auto& e : model.enums) claim_type(e.name, "enum");
    for(const auto& s : model.structs)
    {
        claim_type(s.name, "struct");
        std::set<std::string> names;
        for(std::size_t i = 0; i < s.fields.size(); ++i)
        {
            const auto& f = s.fields[i];
            if(!names.insert(f.name).second)
                throw ModelError(fmt::format("struct '{}': duplicate field '{}'", s.name, f.name));
            if(f.width != 1 && f.width != 2 && f.width != 4 && f.width != 8)
                throw ModelError(fmt::format("struct '{}': field '{}' has width {}", s.name,
                                             f.name, f.width));
            if(f.name == "pNext" && (i != 0 || f.kind != ScalarKind::address))
                throw ModelError(fmt::format(
                    "struct '{}': pNext must be the leading address field", s.name));
        }
    }

    std::set<std::string> fn_names;
    for(const auto& fn : model.functions)
    {
        if(!fn_names.insert(fn.name).second)
            throw ModelError(fmt::format("duplicate function name '{}'", fn.name));
        if(fn.attrs.has(FunctionAttr::minimal_included) &&
           fn.attrs.has(FunctionAttr::default_excluded))
            throw ModelError(fmt::format(
                "function '{}': minimal_included and default_excluded are exclusive", fn.name));
        auto rt = resolve_type(model, fn.return_type);
        if(rt.category == TypeInfo::Category::structure && rt.pointer_depth == 0)
            throw ModelError(fmt::format("function '{}': struct return by value", fn.name));

        std::set<std::string> pnames;
        for(const auto& p : fn.params)
        {
            if(!pnames.insert(p.name).second)
                throw ModelError(
                    fmt::format("function '{}': duplicate parameter '{}'", fn.name, p.name));
            auto t = resolve_type(model, p.c_type);
            if(t.category == TypeInfo::Category::void_type && t.pointer_depth == 0)
                throw ModelError(fmt::format("{}.{}: void parameter", fn.name, p.name));
            if(t.category == TypeInfo::Category::structure && t.pointer_depth == 0)
                throw ModelError(fmt::format("{}.{}: struct passed by value", fn.name, p.name));
            if(p.is_handle != (t.category == TypeInfo::Category::handle && t.pointer_depth == 0))
                throw ModelError(fmt::format("{}.{}: is_handle disagrees with type '{}'",
                                             fn.name, p.name, p.c_type));
            const bool address = t.pointer_depth > 0;
            if(!address && (p.direction == Direction::out || p.direction == Direction::inout))
                throw ModelError(fmt::format("{}.{}: direction {} on a non-address parameter",
                                             fn.name, p.name, to_string(p.direction)));
            if(!p.deref) continue;
            if(!address)
                throw ModelError(
                    fmt::format("{}.{}: deref on a non-address parameter", fn.name, p.name));
            const auto& d = *p.deref;
            if(d.kind == DerefKind::scalar && t.pointer_depth == 1 &&
               t.category == TypeInfo::Category::void_type)
                throw ModelError(fmt::format("{}.{}: scalar deref of void*", fn.name, p.name));
            if(d.kind == DerefKind::array)
            {
                const auto* len = fn.find_param(d.length_param);
                if(!len)
                    throw ModelError(fmt::format("{}.{}: array length parameter '{}' not found",
                                                 fn.name, p.name, d.length_param));
                if(!is_integral(resolve_type(model, len->c_type)))
                    throw ModelError(fmt::format("{}.{}: array length parameter '{}' is not integral",
                                                 fn.name, p.name, d.length_param));
            }
            if(d.kind == DerefKind::blob && d.blob_size == 0)
                throw ModelError(fmt::format("{}.{}: blob deref needs a nonzero size", fn.name,
                                             p.name));
        }
    }
}

std::string_view to_string(Direction d)
{
    switch(d)
    {
        case Direction::in: return "in";
        case Direction::out: return "out";
        case Direction::inout: return "inout";
        case Direction::unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(FunctionAttr a)
{
    switch(a)
    {
        case FunctionAttr::minimal_included: return "minimal_included";
        case FunctionAttr::default_excluded: return "default_excluded";
        case FunctionAttr::profiled: return "profiled";
        case FunctionAttr::releases_handle: return "releases_handle";
        case FunctionAttr::creates_handle: return "creates_handle";
    }
    return "?";
}

std::string_view to_string(ScalarKind k)
{
    switch(k)
    {
        case ScalarKind::u64: return "u64";
        case ScalarKind::i64: return "i64";
        case ScalarKind::f64: return "f64";
        case ScalarKind::address: return "address";
    }
    return "?";
}

std::optional<Direction> direction_from_string(std::string_view s)
{
    for(auto d : {Direction::in, Direction::out, Direction::inout, Direction::unknown})
        if(to_string(d) == s) return d;
    return std::nullopt;
}

std::optional<FunctionAttr> attr_from_string(std::string_view s)
{
    for(auto a : all_function_attrs)
        if(to_string(a) == s) return a;
    return std::nullopt;
}

std::optional<ScalarKind> scalar_kind_from_string(std::string_view s)
{
    for(auto k : {ScalarKind::u64, ScalarKind::i64, ScalarKind::f64, ScalarKind::address})
        if(to_string(k) == s) return k;
    return std::nullopt;
}

std::uint64_t model_fingerprint(const ApiModel& model)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for(unsigned char c : to_yaml(model))
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}
}  // namespace hapi::model
