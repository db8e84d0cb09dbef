#include "hapi/cli/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>

namespace hapi::cli
{
namespace
{
namespace fs = std::filesystem;

template <typename T>
T median(std::vector<T> v)
{
    if(v.empty()) return T{};
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::uint64_t elapsed_since(std::chrono::steady_clock::time_point t0)
{
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count());
}

std::uint64_t stream_bytes(const fs::path& dir, const std::vector<trace::StreamInfo>& streams)
{
    std::uint64_t total = 0;
    for(const auto& s : streams) total += fs::file_size(dir / s.file);
    return total;
}
}  // namespace

std::string config_name(schema::TracingMode mode, bool sample)
{
    const std::string_view m = mode == schema::TracingMode::minimal ? "min" : schema::to_string(mode);
    return fmt::format("{}-{}", sample ? "TS" : "T", m);
}

BenchReport run_bench(const workload::Workload& w, const BenchOptions& options)
{
    if(options.reps == 0) throw Error("bench needs at least one repetition");
    fs::create_directories(options.scratch);
    struct Config
    {
        BenchRow                   row;
        std::vector<std::uint64_t> run_ns;
        std::vector<std::uint64_t> setup_ns;
    };
    std::vector<Config> configs;
    for(bool sample : {false, true})
    {
        if(sample && !options.sample) continue;
        for(auto m : options.modes)
        {
            Config c;
            c.row.config = config_name(m, sample);
            c.row.mode   = m;
            c.row.sample = sample;
            configs.push_back(std::move(c));
        }
    }

    session::TraceOptions base;
    base.wall_clock = true;
    base.hostname   = "bench";
    std::vector<std::uint64_t> baseline;

    // Untimed warm-up. Full mode also counts the tracepoints a run crosses,
    // which every mode pays for, filtered or not.
    session::run_untraced(w, base);
    std::uint64_t tracepoints[2] = {0, 0};
    for(bool sample : {false, true})
    {
        if(sample && !options.sample) continue;
        auto opts   = base;
        opts.mode   = schema::TracingMode::full;
        opts.sample = sample;
        const auto dir = options.scratch / "warmup";
        for(const auto& s : session::trace_workload(w, dir, opts).streams) tracepoints[sample] += s.event_count;
        fs::remove_all(dir);
    }
    for(unsigned rep = 0; rep < options.reps; ++rep)
    {
        baseline.push_back(session::run_untraced(w, base).run_wall_ns);
        for(auto& c : configs)
        {
            auto opts   = base;
            opts.mode   = c.row.mode;
            opts.sample = c.row.sample;
            const auto dir    = options.scratch / fmt::format("{}.{}", c.row.config, rep);
            const auto t0     = std::chrono::steady_clock::now();
            const auto result = session::trace_workload(w, dir, opts);
            const auto total  = elapsed_since(t0);
            c.run_ns.push_back(result.run_wall_ns);
            c.setup_ns.push_back(total - result.run_wall_ns);
            if(rep == 0)
            {
                c.row.size_bytes = stream_bytes(dir, result.streams);
                for(const auto& s : result.streams) c.row.events += s.event_count;
            }
            fs::remove_all(dir);
        }
    }
    fs::remove_all(options.scratch);

    BenchReport report;
    report.baseline_median_ns = median(baseline);
    const auto base_ns        = static_cast<double>(report.baseline_median_ns);
    for(auto& c : configs)
    {
        const auto delta          = static_cast<double>(median(c.run_ns)) - base_ns;
        c.row.median_overhead_pct = base_ns > 0 ? 100.0 * delta / base_ns : 0.0;
        c.row.setup_ns            = median(c.setup_ns);
        c.row.tracepoints         = tracepoints[c.row.sample];
        c.row.per_event_ns        = c.row.tracepoints ? delta / static_cast<double>(c.row.tracepoints) : 0.0;
        report.rows.push_back(std::move(c.row));
    }
    return report;
}

std::string render_bench(const BenchReport& report)
{
    std::string out = fmt::format("baseline median: {} ns\n", report.baseline_median_ns);
    out += fmt::format("{:>10} | {:>10} | {:>12} | {:>8} | {:>11} | {:>10} | {:>12} |\n", "config", "median %",
                       "size bytes", "events", "tracepoints", "ns/event", "setup ns");
    for(const auto& r : report.rows)
        out += fmt::format("{:>10} | {:>10.2f} | {:>12} | {:>8} | {:>11} | {:>10.1f} | {:>12} |\n", r.config,
                           r.median_overhead_pct, r.size_bytes, r.events, r.tracepoints, r.per_event_ns, r.setup_ns);
    return out;
}
}  // namespace hapi::cli
