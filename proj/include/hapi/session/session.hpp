#pragma once

#include "hapi/codegen/registry.hpp"
#include "hapi/sampler/sampler.hpp"
#include "hapi/sinks/tally.hpp"
#include "hapi/sinks/validator.hpp"
#include "hapi/trace/writer.hpp"
#include "hapi/workload/driver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hapi::session
{
struct TraceOptions
{
    schema::TracingMode    mode     = schema::TracingMode::standard;
    schema::Scenario       scenario = schema::Scenario::hybrid;
    bool                   sample   = false;
    std::uint64_t          sample_period_ns = sampler::default_period_ns;
    workload::InjectionSet inject;
    /// Wall-clock timestamps and real worker threads. The device model
    /// still runs on its own virtual clock.
    bool          wall_clock = false;
    std::size_t   capacity   = trace::buffer_capacity_from_env();
    std::uint64_t pid        = workload::default_pid;
    std::string   hostname;  // empty: this machine's name
};

struct TraceResult
{
    workload::RunSummary           summary;
    std::vector<trace::StreamInfo> streams;
    std::uint64_t                  samples     = 0;
    std::uint64_t                  run_wall_ns = 0;  // workload only, without writer setup
};

struct UntracedResult
{
    workload::RunSummary summary;
    std::uint64_t        run_wall_ns = 0;
};

/// Model of the bundled mock API for a scenario.
const model::ApiModel& mock_model(schema::Scenario scenario);
/// Registry generated from mock_model(scenario).
schema::SchemaRegistry mock_registry(schema::Scenario scenario);

/// A bundled workload name ("W1") or a path to a workload file.
workload::Workload load_workload(const std::string& name_or_path);

/// Runs `w` against a fresh mock runtime and records it into `dir`.
TraceResult trace_workload(const workload::Workload& w, const std::filesystem::path& dir,
                           const TraceOptions& options = {});

/// Runs `w` with no tracing at all (benchmark baseline).
UntracedResult run_untraced(const workload::Workload& w, const TraceOptions& options = {});

/// One pipeline pass over a finalized trace.
sinks::TallyReport tally_trace(const std::filesystem::path& dir);

/// Validates a trace against `model`, or the bundled model for the trace's
/// scenario when null.
std::vector<sinks::ValidationFinding> validate_trace(const std::filesystem::path& dir,
                                                     const model::ApiModel* model = nullptr);
}  // namespace hapi::session
