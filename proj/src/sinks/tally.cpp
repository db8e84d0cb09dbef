#include "hapi/sinks/tally.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace hapi::sinks
{
namespace
{
using nlohmann::json;

struct Unit
{
    std::uint64_t    scale;
    std::string_view suffix;
};

constexpr Unit units[] = {{1'000'000'000, "s"}, {1'000'000, "ms"}, {1'000, "us"}, {1, "ns"}};

/// Right-aligned columns joined by " | " with a trailing " |".
std::string render_table(const std::vector<std::vector<std::string>>& cells)
{
    std::vector<std::size_t> width;
    for(const auto& row : cells)
    {
        width.resize(std::max(width.size(), row.size()), 0);
        for(std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::string out;
    for(const auto& row : cells)
    {
        for(std::size_t i = 0; i < row.size(); ++i)
        {
            if(i) out += " | ";
            out += fmt::format("{:>{}}", row[i], width[i]);
        }
        out += " |\n";
    }
    return out;
}

std::string render_section(const std::vector<TallyRow>& rows)
{
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Name", "Time", "Time(%)", "Calls", "Average", "Min", "Max", "Errors"});
    TallyRow total{"Total", 0, 0, 0, 0, 0};
    for(const auto& r : rows)
    {
        total.min_ns = total.count ? std::min(total.min_ns, r.min_ns) : r.min_ns;
        total.max_ns = std::max(total.max_ns, r.max_ns);
        total.time_ns += r.time_ns;
        total.count += r.count;
        total.error_count += r.error_count;
    }
    auto line = [&](const TallyRow& r) {
        cells.push_back({r.name, format_duration(r.time_ns), format_percent(r.time_ns, total.time_ns),
                         std::to_string(r.count), format_duration(r.average_ns()), format_duration(r.min_ns),
                         format_duration(r.max_ns), std::to_string(r.error_count)});
    };
    for(const auto& r : rows) line(r);
    line(total);
    return render_table(cells);
}

json row_to_json(const TallyRow& r)
{
    return json{{"name", r.name},     {"time_ns", r.time_ns}, {"count", r.count},
                {"min_ns", r.min_ns}, {"max_ns", r.max_ns},   {"error_count", r.error_count}};
}

TallyRow row_from_json(const json& j)
{
    return TallyRow{j.at("name").get<std::string>(), j.at("time_ns").get<std::uint64_t>(),
                    j.at("count").get<std::uint64_t>(), j.at("min_ns").get<std::uint64_t>(),
                    j.at("max_ns").get<std::uint64_t>(), j.at("error_count").get<std::uint64_t>()};
}

json stream_to_json(const trace::StreamId& s)
{
    return json{{"hostname", s.hostname}, {"pid", s.pid}, {"tid", s.tid}};
}

trace::StreamId stream_from_json(const json& j)
{
    return trace::StreamId{j.at("hostname").get<std::string>(), j.at("pid").get<std::uint64_t>(),
                           j.at("tid").get<std::uint64_t>()};
}

constexpr std::string_view tally_format = "hapitrace-tally";
constexpr int              tally_version = 1;
}  // namespace

const TallyRow* TallyReport::find(Section s, std::string_view name) const
{
    const auto& r  = rows(s);
    auto        it = std::find_if(r.begin(), r.end(), [&](const TallyRow& x) { return x.name == name; });
    return it == r.end() ? nullptr : &*it;
}

void sort_rows(std::vector<TallyRow>& rows)
{
    std::sort(rows.begin(), rows.end(), [](const TallyRow& a, const TallyRow& b) {
        if(a.time_ns != b.time_ns) return a.time_ns > b.time_ns;
        return a.name < b.name;
    });
}

TallyReport tally_spans(std::span<const pipeline::Span> spans, std::uint64_t fingerprint,
                        std::set<std::string> backends)
{
    TallyBuilder b;
    for(const auto& s : spans) b.add(s);
    TallyReport base;
    base.fingerprint = fingerprint;
    base.backends    = std::move(backends);
    return b.finish(std::move(base));
}

std::string format_duration(std::uint64_t ns)
{
    for(const auto& u : units)
    {
        if(ns < u.scale && u.scale != 1) continue;
        const std::uint64_t q = ns / u.scale;
        const std::uint64_t r = ns % u.scale;
        const std::uint64_t h = q * 100 + (r * 100 + u.scale / 2) / u.scale;
        return fmt::format("{}.{:02}{}", h / 100, h % 100, u.suffix);
    }
    return "0.00ns";
}

std::string format_percent(std::uint64_t part, std::uint64_t total)
{
    if(total == 0) return "0.00";
    const auto h = static_cast<std::uint64_t>(
        std::llround(static_cast<long double>(part) * 10000.0L / static_cast<long double>(total)));
    return fmt::format("{}.{:02}", h / 100, h % 100);
}

std::string backend_tag(std::string_view api_name)
{
    std::string out = "BACKEND_";
    for(char c : api_name) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string render_tally(const TallyReport& report)
{
    std::string backends;
    for(const auto& b : report.backends) backends += (backends.empty() ? "" : ",") + b;
    if(backends.empty()) backends = "BACKEND_NONE";

    std::string out = fmt::format("{} | {} Hostnames | {} Processes | {} Threads |\n\n", backends,
                                  report.hostnames.size(), report.processes.size(), report.threads.size());
    out += render_section(report.host);
    out += "\nDevice commands\n\n";
    out += render_section(report.device);
    if(!report.dropped.empty())
    {
        std::uint64_t total = 0;
        for(const auto& [_, n] : report.dropped) total += n;
        out += fmt::format("\nDropped events: {} in {} streams\n", total, report.dropped.size());
    }
    return out;
}

std::string tally_to_json(const TallyReport& r)
{
    nlohmann::ordered_json j;
    j["format"]      = tally_format;
    j["version"]     = tally_version;
    j["fingerprint"] = fmt::format("{:016x}", r.fingerprint);
    j["backends"]    = r.backends;
    j["hostnames"]   = r.hostnames;
    auto procs       = json::array();
    for(const auto& p : r.processes) procs.push_back(json{{"hostname", p.hostname}, {"pid", p.pid}});
    j["processes"] = procs;
    auto threads   = json::array();
    for(const auto& t : r.threads) threads.push_back(stream_to_json(t));
    j["threads"]  = threads;
    auto dropped  = json::array();
    for(const auto& [s, n] : r.dropped)
    {
        auto d     = stream_to_json(s);
        d["count"] = n;
        dropped.push_back(d);
    }
    j["dropped"] = dropped;
    auto host    = json::array();
    for(const auto& row : r.host) host.push_back(row_to_json(row));
    j["host"]   = host;
    auto device = json::array();
    for(const auto& row : r.device) device.push_back(row_to_json(row));
    j["device"] = device;
    return j.dump(2) + "\n";
}

TallyReport tally_from_json(std::string_view text)
{
    try
    {
        const auto j = json::parse(text);
        if(j.at("format").get<std::string>() != tally_format)
            throw SchemaError("format", "not a tally report");
        if(j.at("version").get<int>() != tally_version)
            throw SchemaError("version", fmt::format("unsupported version {}", j.at("version").dump()));
        TallyReport r;
        r.fingerprint = std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16);
        r.backends    = j.at("backends").get<std::set<std::string>>();
        r.hostnames   = j.at("hostnames").get<std::set<std::string>>();
        for(const auto& p : j.at("processes"))
            r.processes.insert(ProcessId{p.at("hostname").get<std::string>(), p.at("pid").get<std::uint64_t>()});
        for(const auto& t : j.at("threads")) r.threads.insert(stream_from_json(t));
        for(const auto& d : j.at("dropped")) r.dropped[stream_from_json(d)] = d.at("count").get<std::uint64_t>();
        for(const auto& row : j.at("host")) r.host.push_back(row_from_json(row));
        for(const auto& row : j.at("device")) r.device.push_back(row_from_json(row));
        sort_rows(r.host);
        sort_rows(r.device);
        return r;
    } catch(const json::exception& e)
    {
        throw SchemaError("tally", e.what());
    } catch(const std::invalid_argument& e)
    {
        throw SchemaError("fingerprint", e.what());
    }
}

void TallyBuilder::add(const pipeline::Span& s)
{
    auto& table      = s.kind == pipeline::SpanKind::host_api ? m_host : m_device;
    auto [it, fresh] = table.try_emplace(s.name);
    auto&      row   = it->second;
    const auto d     = s.duration_ns();
    if(fresh)
    {
        row.name   = s.name;
        row.min_ns = d;
        row.max_ns = d;
    }
    row.time_ns += d;
    ++row.count;
    row.min_ns = std::min(row.min_ns, d);
    row.max_ns = std::max(row.max_ns, d);
    if(s.kind == pipeline::SpanKind::host_api && s.result != 0) ++row.error_count;

    m_hostnames.insert(s.stream.hostname);
    m_processes.insert(ProcessId{s.stream.hostname, s.stream.pid});
    m_threads.insert(s.stream);
}

TallyReport TallyBuilder::finish(TallyReport base)
{
    base.hostnames.merge(m_hostnames);
    base.processes.merge(m_processes);
    base.threads.merge(m_threads);
    for(auto& [_, r] : m_host) base.host.push_back(std::move(r));
    for(auto& [_, r] : m_device) base.device.push_back(std::move(r));
    sort_rows(base.host);
    sort_rows(base.device);
    *this = TallyBuilder{};
    return base;
}

void TallySink::on_start(const pipeline::PipelineContext& ctx)
{
    m_base             = TallyReport{};
    m_base.fingerprint = ctx.registry.fingerprint;
    m_base.backends.insert(backend_tag(ctx.registry.api_name));
    for(const auto& s : ctx.streams)
        if(s.dropped_count) m_base.dropped[s.id] = s.dropped_count;
    m_builder = TallyBuilder{};
}

void TallySink::on_message(const pipeline::Message& msg)
{
    if(const auto* s = std::get_if<pipeline::Span>(&msg)) m_builder.add(*s);
}

void TallySink::on_finish() { m_report = m_builder.finish(m_base); }
}  // namespace hapi::sinks
