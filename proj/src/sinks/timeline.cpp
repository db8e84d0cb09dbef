#include "hapi/sinks/timeline.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace hapi::sinks
{
namespace
{
using ojson = nlohmann::ordered_json;

constexpr std::uint64_t device_track_base = 0x7f000000;

double to_us(std::uint64_t ns) { return static_cast<double>(ns) / 1000.0; }

ojson args_of(const pipeline::FieldMap& fields)
{
    ojson a = ojson::object();
    for(const auto& [k, v] : fields)
    {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr(std::is_same_v<T, trace::Address>)
                    a[k] = fmt::format("0x{:016x}", x.value);
                else if constexpr(std::is_same_v<T, trace::Blob>)
                    a[k] = x.size();
                else
                    a[k] = x;
            },
            v);
    }
    return a;
}

std::string dump(const ojson& j) { return j.dump(-1, ' ', false, ojson::error_handler_t::replace); }
}  // namespace

std::uint64_t device_track_tid(std::uint64_t device, std::uint64_t tile, unsigned engine)
{
    return device_track_base + device * 16 + tile * 2 + engine;
}

TimelineSink::TimelineSink(std::filesystem::path out) : m_path(std::move(out)) {}

void TimelineSink::on_start(const pipeline::PipelineContext&)
{
    m_out.open(m_path, std::ios::binary | std::ios::trunc);
    if(!m_out) throw Error("timeline: cannot write '" + m_path.string() + "'");
    m_out << "[\n";
    m_objects = 0;
    m_named_tracks.clear();
}

void TimelineSink::write(const std::string& object)
{
    if(m_objects++) m_out << ",\n";
    m_out << object;
}

void TimelineSink::on_message(const pipeline::Message& msg)
{
    if(const auto* s = std::get_if<pipeline::Span>(&msg))
    {
        std::uint64_t tid = s->stream.tid;
        if(s->kind == pipeline::SpanKind::device_command)
        {
            const auto* kind   = pipeline::find_field(s->entry_payload, "command_kind");
            const bool  copy   = kind && std::get_if<std::string>(kind) && std::get<std::string>(*kind) == "memcpy";
            const unsigned eng = copy ? 1 : 0;
            tid                = device_track_tid(s->device, s->tile, eng);
            if(m_named_tracks.emplace(s->stream.pid, tid).second)
            {
                ojson m{{"name", "thread_name"}, {"ph", "M"}, {"ts", 0}, {"pid", s->stream.pid}, {"tid", tid},
                        {"args", {{"name", fmt::format("GPU {} Tile {} {}", s->device, s->tile,
                                                       copy ? "Copy" : "Compute")}}}};
                write(dump(m));
            }
        }
        ojson x{{"name", s->name},
                {"cat", s->kind == pipeline::SpanKind::host_api ? "host" : "device"},
                {"ph", "X"},
                {"ts", to_us(s->start_ns)},
                {"dur", to_us(s->duration_ns())},
                {"pid", s->stream.pid},
                {"tid", tid}};
        auto args = args_of(s->kind == pipeline::SpanKind::host_api ? s->exit_payload : s->entry_payload);
        if(s->truncated) args["truncated"] = true;
        x["args"] = std::move(args);
        write(dump(x));
    }
    else if(const auto* t = std::get_if<pipeline::TelemetrySample>(&msg))
    {
        ojson c{{"name", std::string(schema::counter_display_name(t->counter))},
                {"ph", "C"},
                {"ts", to_us(t->timestamp_ns)},
                {"pid", t->stream.pid},
                {"tid", t->stream.tid},
                {"args", {{"value", t->value}}}};
        write(dump(c));
    }
}

void TimelineSink::on_finish()
{
    m_out << (m_objects ? "\n]\n" : "]\n");
    m_out.flush();
    if(!m_out) throw Error("timeline: write to '" + m_path.string() + "' failed");
    m_out.close();
}
}  // namespace hapi::sinks
