#include "hapi/session/session.hpp"

#include "hapi/error.hpp"
#include "hapi/mock/bundled.hpp"
#include "hapi/pipeline/pipeline.hpp"
#include "hapi/trace/reader.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>

namespace hapi::session
{
namespace
{
/// Everything one traced or untraced run needs, built in dependency order.
struct Rig
{
    const model::ApiModel&  model;
    schema::SchemaRegistry  registry;
    trace::VirtualClock     device_clock;
    mock::MockRuntime       runtime;
    codegen::DispatchTable  dispatch;
    trace::MonotonicClock   wall;

    explicit Rig(schema::Scenario scenario)
    : model(mock_model(scenario)), registry(codegen::build_schema_registry(model, scenario)),
      runtime(device_clock), dispatch(model, registry, runtime.impl_table())
    {
    }

    const trace::ClockSource& trace_clock(bool wall_clock) const
    {
        return wall_clock ? static_cast<const trace::ClockSource&>(wall) : device_clock;
    }
};

workload::DriverOptions driver_options(const TraceOptions& o, const trace::ClockSource& clock)
{
    workload::DriverOptions d;
    d.pid         = o.pid;
    d.threading   = o.wall_clock ? workload::Threading::real : workload::Threading::interleaved;
    d.inject      = o.inject;
    d.trace_clock = &clock;
    return d;
}

template <typename F>
auto timed(std::uint64_t& wall_ns, F&& f)
{
    const auto t0 = std::chrono::steady_clock::now();
    auto       r  = f();
    wall_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count());
    return r;
}
}  // namespace

const model::ApiModel& mock_model(schema::Scenario scenario) { return mock::mock_model(scenario); }

schema::SchemaRegistry mock_registry(schema::Scenario scenario)
{
    return codegen::build_schema_registry(mock_model(scenario), scenario);
}

workload::Workload load_workload(const std::string& name_or_path)
{
    if(auto text = mock::bundled_workload(name_or_path)) return workload::parse_workload(*text);
    std::ifstream in(name_or_path, std::ios::binary);
    if(!in) throw Error("cannot read workload '" + name_or_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return workload::parse_workload(ss.str());
}

TraceResult trace_workload(const workload::Workload& w, const std::filesystem::path& dir,
                           const TraceOptions& options)
{
    Rig         rig(options.scenario);
    const auto& clock = rig.trace_clock(options.wall_clock);

    trace::WriterOptions wo;
    wo.mode     = options.mode;
    wo.capacity = options.capacity;
    wo.hostname = options.hostname;
    wo.pid      = options.pid;
    auto writer = trace::TraceWriter::open(dir, rig.registry, clock, wo);

    auto driver = driver_options(options, clock);
    std::optional<sampler::Sampler>     virtual_sampler;
    std::optional<sampler::WallSampler> wall_sampler;
    if(options.sample)
    {
        auto& stream = writer->stream(options.pid, workload::sampler_tid(options.pid));
        if(options.wall_clock)
            wall_sampler.emplace(rig.runtime, stream, options.sample_period_ns);
        else
        {
            virtual_sampler.emplace(rig.runtime, stream, options.sample_period_ns);
            virtual_sampler->start(rig.device_clock.now_ns());
            driver.on_progress = [&] { virtual_sampler->advance_to(rig.device_clock.now_ns()); };
        }
    }

    TraceResult result;
    result.summary = timed(result.run_wall_ns, [&] {
        return workload::run_workload(w, rig.dispatch, rig.runtime, writer.get(), driver);
    });
    if(virtual_sampler) result.samples = virtual_sampler->finish(result.summary.end_ns);
    if(wall_sampler) result.samples = wall_sampler->stop();
    result.streams = writer->finalize();
    return result;
}

UntracedResult run_untraced(const workload::Workload& w, const TraceOptions& options)
{
    Rig            rig(options.scenario);
    const auto     driver = driver_options(options, rig.trace_clock(options.wall_clock));
    UntracedResult result;
    result.summary = timed(result.run_wall_ns,
                           [&] { return workload::run_workload(w, rig.dispatch, rig.runtime, nullptr, driver); });
    return result;
}

sinks::TallyReport tally_trace(const std::filesystem::path& dir)
{
    trace::TraceReader reader(dir);
    sinks::TallySink   tally;
    pipeline::Sink*    sinks[] = {&tally};
    pipeline::run_pipeline(reader, sinks);
    return tally.report();
}

std::vector<sinks::ValidationFinding> validate_trace(const std::filesystem::path& dir,
                                                     const model::ApiModel* model)
{
    trace::TraceReader   reader(dir);
    const auto&          m = model ? *model : mock_model(reader.registry().scenario);
    sinks::ValidatorSink v(m);
    pipeline::Sink*      sinks[] = {&v};
    pipeline::run_pipeline(reader, sinks);
    return v.findings();
}
}  // namespace hapi::session
