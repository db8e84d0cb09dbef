#pragma once

#include "hapi/session/session.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hapi::cli
{
struct BenchOptions
{
    std::vector<schema::TracingMode> modes = {schema::TracingMode::minimal, schema::TracingMode::standard,
                                              schema::TracingMode::full};
    bool                  sample = false;  // adds the TS-* configurations
    unsigned              reps   = 5;
    std::filesystem::path scratch;  // trace directories; removed afterwards
};

struct BenchRow
{
    std::string         config;  // "T-default", "TS-full", ...
    schema::TracingMode mode   = schema::TracingMode::standard;
    bool                sample = false;
    /// Workload run phase only; writer setup and finalize are in setup_ns.
    double              median_overhead_pct = 0;
    std::uint64_t       size_bytes = 0;  // stream files only
    std::uint64_t       events     = 0;  // written
    std::uint64_t       tracepoints = 0;  // crossed, written or filtered (full-mode event count)
    /// Hot-path cost: (median traced run - median baseline run) / tracepoints.
    double              per_event_ns = 0;
    /// Median time outside the run phase: model, writer open, finalize.
    std::uint64_t       setup_ns = 0;
};

struct BenchReport
{
    std::uint64_t         baseline_median_ns = 0;  // untraced run phase
    std::vector<BenchRow> rows;
};

/// "T-min", "T-default", "T-full"; "TS-" when sampling.
std::string config_name(schema::TracingMode mode, bool sample);

/// Wall-clock runs with real worker threads: an untraced baseline and every
/// configuration, `reps` times each, interleaved.
BenchReport run_bench(const workload::Workload& w, const BenchOptions& options);

std::string render_bench(const BenchReport& report);
}  // namespace hapi::cli
