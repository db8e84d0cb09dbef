#include "hapi/cli/cli.hpp"

#include "hapi/aggregate/aggregate.hpp"
#include "hapi/cli/bench.hpp"
#include "hapi/pipeline/pipeline.hpp"
#include "hapi/sinks/pretty.hpp"
#include "hapi/sinks/timeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <optional>
#include <sstream>

namespace hapi::cli
{
namespace
{
namespace fs = std::filesystem;

const std::map<std::string, schema::TracingMode> mode_names = {{"minimal", schema::TracingMode::minimal},
                                                               {"default", schema::TracingMode::standard},
                                                               {"full", schema::TracingMode::full}};
const std::map<std::string, schema::Scenario> scenario_names = {{"automatic", schema::Scenario::automatic},
                                                                {"hybrid", schema::Scenario::hybrid}};

/// Bad usage caught after CLI11 parsing (exit 2).
struct UsageError : Error
{
    using Error::Error;
};

struct TraceArgs
{
    std::string   mode     = "default";
    std::string   scenario = "hybrid";
    bool          sample   = false;
    std::uint64_t period_ms = sampler::default_period_ns / 1'000'000;
    std::string   inject;
    bool          aggregate_only = false;
    std::size_t   ranks     = 1;
    std::size_t   node_size = 4;
    std::string   out;
    std::string   workload;
};

struct AnalyzeArgs
{
    std::string dir;
    bool        pretty   = false;
    bool        tally    = false;
    bool        validate = false;
    std::string timeline;
    std::string model;
};

struct BenchArgs
{
    std::vector<std::string> modes;
    bool                     sample = false;
    unsigned                 reps   = 5;
    std::string              scratch;
    std::string              workload;
};

struct MergeArgs
{
    std::vector<std::string> files;
    std::size_t              node_size = 4;
    std::string              out;
};

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if(!in) throw Error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err)
{
    session::TraceOptions opts;
    opts.mode             = mode_names.at(a.mode);
    opts.scenario         = scenario_names.at(a.scenario);
    opts.sample           = a.sample;
    opts.sample_period_ns = a.period_ms * 1'000'000;
    try
    {
        opts.inject = workload::parse_injections(a.inject);
    } catch(const Error& e)
    {
        throw UsageError(e.what());
    }
    const auto w = session::load_workload(a.workload);
    const fs::path dir = a.out.empty() ? fs::path("hapitrace-" + w.name) : fs::path(a.out);

    if(a.aggregate_only)
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if(ec || !fs::is_directory(dir)) throw Error("cannot create '" + dir.string() + "'");
        aggregate::AggregateOptions ao;
        ao.ranks     = a.ranks;
        ao.node_size = a.node_size;
        ao.scratch   = dir / ".scratch";
        ao.trace     = opts;
        const auto report = aggregate::aggregate_only_run(w, ao);
        aggregate::write_tally_file(dir / "tally.json", report);
        out << sinks::render_tally(report);
        return 0;
    }

    const auto result = session::trace_workload(w, dir, opts);
    out << sinks::render_tally(session::tally_trace(dir));
    err << fmt::format("trace: {} calls ({} failed), {} streams in {}\n", result.summary.total_calls,
                       result.summary.failed_calls, result.streams.size(), dir.string());
    return 0;
}

int cmd_analyze(AnalyzeArgs a, std::ostream& out, std::ostream& err)
{
    if(!a.pretty && !a.validate && a.timeline.empty()) a.tally = true;
    trace::TraceReader reader(a.dir);

    std::optional<model::ApiModel> custom;
    if(!a.model.empty()) custom = model::load_api_model_yaml(read_file(a.model));
    const auto& model = custom ? *custom : session::mock_model(reader.registry().scenario);

    std::vector<std::unique_ptr<pipeline::Sink>> owned;
    sinks::TallySink*                            tally     = nullptr;
    sinks::ValidatorSink*                        validator = nullptr;
    if(a.pretty) owned.push_back(std::make_unique<sinks::PrettySink>(out));
    if(a.tally) tally = static_cast<sinks::TallySink*>(owned.emplace_back(std::make_unique<sinks::TallySink>()).get());
    if(!a.timeline.empty()) owned.push_back(std::make_unique<sinks::TimelineSink>(a.timeline));
    if(a.validate)
        validator = static_cast<sinks::ValidatorSink*>(
            owned.emplace_back(std::make_unique<sinks::ValidatorSink>(model)).get());

    std::vector<pipeline::Sink*> sinks;
    for(const auto& s : owned) sinks.push_back(s.get());
    const auto stats = pipeline::run_pipeline(reader, sinks);

    if(tally) out << sinks::render_tally(tally->report());
    if(!stats.orphans.empty()) err << fmt::format("analyze: {} orphan exit events\n", stats.orphans.size());
    if(validator)
    {
        for(const auto& f : validator->findings()) out << sinks::format_finding(f) << '\n';
        out << fmt::format("{} findings\n", validator->findings().size());
        if(!validator->findings().empty()) return 1;
    }
    return 0;
}

int cmd_bench(const BenchArgs& a, std::ostream& out)
{
    BenchOptions opts;
    if(!a.modes.empty())
    {
        opts.modes.clear();
        for(const auto& m : a.modes) opts.modes.push_back(mode_names.at(m));
    }
    opts.sample  = a.sample;
    opts.reps    = a.reps;
    opts.scratch = a.scratch.empty() ? fs::temp_directory_path() / fmt::format("hapitrace-bench-{}", ::getpid())
                                     : fs::path(a.scratch);
    out << render_bench(run_bench(session::load_workload(a.workload), opts));
    return 0;
}

int cmd_merge(const MergeArgs& a, std::ostream& out)
{
    std::vector<sinks::TallyReport> reports;
    for(const auto& f : a.files) reports.push_back(aggregate::read_tally_file(f));
    const auto merged = aggregate::hierarchical_merge(reports, a.node_size);
    if(!a.out.empty()) aggregate::write_tally_file(a.out, merged);
    out << sinks::render_tally(merged);
    return 0;
}

std::vector<std::string> keys(const auto& map)
{
    std::vector<std::string> out;
    for(const auto& [k, _] : map) out.push_back(k);
    return out;
}
}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Tracing and analysis front end for the mock GPU runtime", "hapitrace"};
    app.require_subcommand(1);

    TraceArgs t;
    auto*     trace = app.add_subcommand("trace", "Run a workload under tracing");
    trace->add_option("--mode", t.mode, "Tracing mode")->check(CLI::IsMember(keys(mode_names)));
    trace->add_flag("--sample", t.sample, "Record device telemetry");
    trace->add_option("--sample-period", t.period_ms, "Sampling period in milliseconds")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{3'600'000}));
    trace->add_option("--scenario", t.scenario, "Model scenario")->check(CLI::IsMember(keys(scenario_names)));
    trace->add_option("--inject", t.inject, "Comma-separated defects: uninit_pnext,leak_event,no_reset_cmdlist");
    trace->add_flag("--aggregate-only", t.aggregate_only, "Keep only the merged tally");
    trace->add_option("--ranks", t.ranks, "Rank instances under --aggregate-only")->check(CLI::PositiveNumber);
    trace->add_option("--node-size", t.node_size, "Ranks per local master")->check(CLI::PositiveNumber);
    trace->add_option("--out", t.out, "Output directory");
    trace->add_option("workload", t.workload, "Workload file or bundled name (W1, W2, W3)")->required();

    AnalyzeArgs an;
    auto*       analyze = app.add_subcommand("analyze", "Run sinks over a trace directory");
    analyze->add_option("dir", an.dir, "Trace directory")->required();
    analyze->add_flag("--pretty", an.pretty, "Print every event");
    analyze->add_flag("--tally", an.tally, "Print the tally (the default)");
    analyze->add_option("--timeline", an.timeline, "Write a Chrome trace-event JSON file");
    analyze->add_flag("--validate", an.validate, "Check API usage; exit 1 on findings");
    analyze->add_option("--model", an.model, "API model YAML for --validate");

    BenchArgs b;
    auto*     bench = app.add_subcommand("bench", "Measure tracing overhead in wall-clock mode");
    bench->add_option("--mode", b.modes, "Modes to measure (repeatable)")
        ->check(CLI::IsMember(keys(mode_names)))
        ->delimiter(',');
    bench->add_flag("--sample", b.sample, "Also measure with telemetry sampling");
    bench->add_option("--reps", b.reps, "Repetitions per configuration")->check(CLI::PositiveNumber);
    bench->add_option("--scratch", b.scratch, "Directory for temporary traces");
    bench->add_option("workload", b.workload, "Workload file or bundled name")->required();

    MergeArgs m;
    auto*     merge = app.add_subcommand("merge", "Merge tally JSON files");
    merge->add_option("files", m.files, "Tally files")->required();
    merge->add_option("--node-size", m.node_size, "Files per local master")->check(CLI::PositiveNumber);
    merge->add_option("--out", m.out, "Write the merged tally JSON here");

    try
    {
        app.parse(argc, argv);
    } catch(const CLI::CallForHelp&)
    {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch(const CLI::ParseError& e)
    {
        err << "error: " << e.what() << "\n\n";
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return 2;
    }

    try
    {
        if(*trace) return cmd_trace(t, out, err);
        if(*analyze) return cmd_analyze(an, out, err);
        if(*bench) return cmd_bench(b, out);
        return cmd_merge(m, out);
    } catch(const UsageError& e)
    {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch(const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}
}  // namespace hapi::cli
