#include "hapi/codegen/interposer.hpp"

#include "hapi/codegen/registry.hpp"
#include "hapi/trace/event.hpp"

#include <fmt/format.h>

#include <iterator>

namespace hapi::codegen
{
namespace
{
using schema::FieldKind;

std::string c_literal_lines(std::string_view text, std::string_view indent)
{
    constexpr std::size_t chunk = 72;
    std::string           out;
    std::string           line;
    std::size_t           taken = 0;
    auto                  flush = [&] {
        out += fmt::format("{}\"{}\"\n", indent, line);
        line.clear();
        taken = 0;
    };
    for(char c : text)
    {
        if(c == '"' || c == '\\') line += '\\';
        line += c;
        if(++taken == chunk) flush();
    }
    if(!line.empty() || out.empty()) flush();
    return out;
}

std::string put_call(FieldKind kind, const std::string& expr)
{
    switch(kind)
    {
        case FieldKind::u64: return fmt::format("hapi_put_u64(&hapi_b, (uint64_t)({}));", expr);
        case FieldKind::i64: return fmt::format("hapi_put_i64(&hapi_b, (int64_t)({}));", expr);
        case FieldKind::f64: return fmt::format("hapi_put_f64(&hapi_b, (double)({}));", expr);
        case FieldKind::address:
            return fmt::format("hapi_put_u64(&hapi_b, (uint64_t)(uintptr_t)({}));", expr);
        case FieldKind::string: return fmt::format("hapi_put_string(&hapi_b, {});", expr);
        case FieldKind::blob: return fmt::format("hapi_put_bytes(&hapi_b, {});", expr);
    }
    return {};
}

std::string capture_stmt(const model::FunctionDecl& fn, const Capture& c)
{
    const auto& pname = c.source == CaptureSource::result ? std::string() : fn.params[c.param].name;
    switch(c.source)
    {
        case CaptureSource::argument: return put_call(c.kind, pname);
        case CaptureSource::c_string: return put_call(c.kind, pname);
        case CaptureSource::result: return put_call(c.kind, "hapi_result");
        case CaptureSource::deref_value:
            return put_call(c.kind, fmt::format("{0} ? *{0} : 0", pname));
        case CaptureSource::struct_field:
            return put_call(c.kind, fmt::format("{0} ? {0}->{1} : 0", pname, c.member));
        case CaptureSource::deref_bytes:
        {
            std::string count =
                c.length_param
                    ? fmt::format("(uint64_t)({}) * {}u", fn.params[*c.length_param].name, c.element_size)
                    : fmt::format("{}u", c.fixed_size);
            return put_call(c.kind, fmt::format("(const void*){}, {}", pname, count));
        }
    }
    return {};
}

std::size_t max_payload(const std::vector<Capture>& caps)
{
    std::size_t n = 0;
    for(const auto& c : caps)
        n += (c.kind == FieldKind::string || c.kind == FieldKind::blob) ? 4 + trace::capture_byte_cap : 8;
    return n;
}

bool returns_void(const model::ApiModel& model, const model::FunctionDecl& fn)
{
    auto t = model::resolve_type(model, fn.return_type);
    return t.category == model::TypeInfo::Category::void_type && t.pointer_depth == 0;
}

std::string param_list(const model::FunctionDecl& fn, bool with_names)
{
    if(fn.params.empty()) return "void";
    std::string out;
    for(std::size_t i = 0; i < fn.params.size(); ++i)
    {
        if(i) out += ", ";
        out += fn.params[i].c_type;
        if(with_names) out += " " + fn.params[i].name;
    }
    return out;
}

std::string arg_list(const model::FunctionDecl& fn)
{
    std::string out;
    for(std::size_t i = 0; i < fn.params.size(); ++i)
    {
        if(i) out += ", ";
        out += fn.params[i].name;
    }
    return out;
}

constexpr std::string_view prelude = R"(#define _GNU_SOURCE
#include <dlfcn.h>
#include <pthread.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "hapi_writer.h"
#include "{header}"

#define HAPI_CAPTURE_CAP 4096u

typedef void (*hapi_profiling_hook_t)(hapi_stream* stream, uint32_t schema_id,
                                      uint64_t timestamp_ns, const char* function);

typedef struct
{{
    unsigned char* data;
    uint32_t len;
}} hapi_buf;

static void hapi_put_u32(hapi_buf* b, uint32_t v)
{{
    int i;
    for(i = 0; i < 4; ++i) b->data[b->len++] = (unsigned char)(v >> (8 * i));
}}

static void hapi_put_u64(hapi_buf* b, uint64_t v)
{{
    int i;
    for(i = 0; i < 8; ++i) b->data[b->len++] = (unsigned char)(v >> (8 * i));
}}

static void hapi_put_i64(hapi_buf* b, int64_t v) {{ hapi_put_u64(b, (uint64_t)v); }}

static void hapi_put_f64(hapi_buf* b, double v)
{{
    uint64_t u;
    memcpy(&u, &v, sizeof u);
    hapi_put_u64(b, u);
}}

static void hapi_put_bytes(hapi_buf* b, const void* p, uint64_t n)
{{
    if(!p) n = 0;
    if(n > HAPI_CAPTURE_CAP) n = HAPI_CAPTURE_CAP;
    hapi_put_u32(b, (uint32_t)n);
    if(n) memcpy(b->data + b->len, p, (size_t)n);
    b->len += (uint32_t)n;
}}

static void hapi_put_string(hapi_buf* b, const char* s)
{{
    uint64_t n = 0;
    if(s)
        while(n < HAPI_CAPTURE_CAP && s[n]) ++n;
    hapi_put_bytes(b, s, n);
}}

)";

constexpr std::string_view runtime = R"(
static pthread_once_t hapi_once = PTHREAD_ONCE_INIT;
static hapi_writer* hapi_global_writer = NULL;
static hapi_profiling_hook_t hapi_profiling_hook_fn = NULL;

static void* hapi_resolve(const char* name)
{{
    void* sym = dlsym(RTLD_NEXT, name);
    if(!sym)
    {{
        fprintf(stderr, "hapitrace: cannot resolve real symbol '%s'\n", name);
        abort();
    }}
    return sym;
}}

static void hapi_fini(void)
{{
    if(hapi_global_writer)
    {{
        hapi_writer_close(hapi_global_writer);
        hapi_global_writer = NULL;
    }}
}}

static void hapi_init(void)
{{
    const char* dir = getenv("HAPITRACE_DIR");
    const char* mode = getenv("HAPITRACE_MODE");
{resolve}    *(void**)(&hapi_profiling_hook_fn) = dlsym(RTLD_DEFAULT, "hapi_profiling_hook");
    if(dir && *dir)
    {{
        hapi_global_writer =
            hapi_writer_open(dir, hapi_registry_json, (mode && *mode) ? mode : "default");
        if(!hapi_global_writer)
            fprintf(stderr, "hapitrace: cannot open trace directory '%s'\n", dir);
        else
            atexit(hapi_fini);
    }}
}}

static hapi_stream* hapi_current_stream(void)
{{
    pthread_once(&hapi_once, hapi_init);
    return hapi_global_writer ? hapi_writer_acquire_stream(hapi_global_writer) : NULL;
}}

static void hapi_emit(hapi_stream* s, uint32_t schema_id, const hapi_buf* b)
{{
    hapi_writer_emit(s, schema_id, hapi_writer_clock_ns(hapi_global_writer), b->data, b->len);
}}
)";
}  // namespace

std::string emit_interposer_source(const model::ApiModel& model,
                                   const schema::SchemaRegistry& registry,
                                   const InterposerOptions& options)
{
    const auto plan   = build_capture_plan(model, registry);
    const auto header = options.api_header.empty() ? model.api_name + ".h" : options.api_header;

    std::string out;
    auto        it = std::back_inserter(out);
    fmt::format_to(it,
                   "/* Interposition library for API '{}' (model fingerprint {:016x}, {} scenario).\n"
                   " * Generated by hapitrace. Do not edit. */\n",
                   model.api_name, registry.fingerprint, schema::to_string(registry.scenario));
    fmt::format_to(it, fmt::runtime(prelude), fmt::arg("header", header));
    out += "static const char hapi_registry_json[] =\n";
    out += c_literal_lines(schema::registry_to_json(registry), "    ");
    out.back() = ';';
    out += "\n\n";

    for(const auto& fn : model.functions)
    {
        fmt::format_to(it, "typedef {} (*hapi_real_{}_t)({});\n", fn.return_type, fn.name,
                       param_list(fn, false));
        fmt::format_to(it, "static hapi_real_{0}_t hapi_real_{0} = NULL;\n", fn.name);
    }

    std::string resolve;
    for(const auto& fn : model.functions)
        resolve += fmt::format("    *(void**)(&hapi_real_{0}) = hapi_resolve(\"{0}\");\n", fn.name);
    fmt::format_to(it, fmt::runtime(runtime), fmt::arg("resolve", resolve));

    for(std::size_t fi = 0; fi < model.functions.size(); ++fi)
    {
        const auto& fn   = model.functions[fi];
        const auto& fp   = plan.functions[fi];
        const bool  void_ret = returns_void(model, fn);
        const auto  cap  = std::max<std::size_t>(1, std::max(max_payload(fp.entry), max_payload(fp.exit)));

        fmt::format_to(it, "\n{} {}({})\n{{\n", fn.return_type, fn.name, param_list(fn, true));
        fmt::format_to(it, "    unsigned char hapi_storage[{}];\n", cap);
        out += "    hapi_buf hapi_b;\n";
        out += "    hapi_stream* hapi_s = hapi_current_stream();\n";
        if(!void_ret) fmt::format_to(it, "    {} hapi_result;\n", fn.return_type);
        out += "    hapi_b.data = hapi_storage;\n";
        out += "    if(hapi_s)\n    {\n        hapi_b.len = 0;\n";
        for(const auto& c : fp.entry) fmt::format_to(it, "        {}\n", capture_stmt(fn, c));
        fmt::format_to(it, "        hapi_emit(hapi_s, {}u, &hapi_b);\n    }}\n", fp.entry_id);
        if(void_ret)
            fmt::format_to(it, "    hapi_real_{}({});\n", fn.name, arg_list(fn));
        else
            fmt::format_to(it, "    hapi_result = hapi_real_{}({});\n", fn.name, arg_list(fn));
        out += "    if(hapi_s)\n    {\n        hapi_b.len = 0;\n";
        for(const auto& c : fp.exit) fmt::format_to(it, "        {}\n", capture_stmt(fn, c));
        fmt::format_to(it, "        hapi_emit(hapi_s, {}u, &hapi_b);\n", fp.exit_id);
        if(fp.profiling_id)
            fmt::format_to(it,
                           "        if(hapi_profiling_hook_fn)\n"
                           "            hapi_profiling_hook_fn(hapi_s, {}u, "
                           "hapi_writer_clock_ns(hapi_global_writer), \"{}\");\n",
                           *fp.profiling_id, fn.name);
        out += "    }\n";
        if(!void_ret) out += "    return hapi_result;\n";
        out += "}\n";
    }
    return out;
}
}  // namespace hapi::codegen
