#pragma once

#include "hapi/codegen/dispatch.hpp"
#include "hapi/mock/runtime.hpp"
#include "hapi/trace/writer.hpp"
#include "hapi/workload/workload.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>

namespace hapi::workload
{
inline constexpr std::uint64_t default_pid = 1000;

/// Virtual thread ids: the main thread uses the pid, parallel worker k uses
/// pid + 1 + k, the sampler pid + 1000.
constexpr std::uint64_t main_tid(std::uint64_t pid) { return pid; }
constexpr std::uint64_t worker_tid(std::uint64_t pid, unsigned k) { return pid + 1 + k; }
constexpr std::uint64_t sampler_tid(std::uint64_t pid) { return pid + 1000; }

enum class Threading : std::uint8_t
{
    interleaved,  // one OS thread, round-robin at call granularity
    real,         // one OS thread per parallel worker
};

struct DriverOptions
{
    std::uint64_t pid       = default_pid;
    Threading     threading = Threading::interleaved;
    /// Added to the workload's own `inject` set.
    InjectionSet inject;
    /// Timestamps for traced calls. Null means the runtime's virtual clock.
    const trace::ClockSource* trace_clock = nullptr;
    /// Called after every step that may move the clock. Serialized.
    std::function<void()> on_progress;
};

struct RunSummary
{
    std::uint64_t                        start_ns = 0;  // runtime clock
    std::uint64_t                        end_ns   = 0;
    std::map<std::string, std::uint64_t> call_counts;   // by function name
    std::uint64_t                        total_calls  = 0;
    std::uint64_t                        failed_calls = 0;  // nonzero result, NOT_READY included

    std::uint64_t virtual_duration_ns() const { return end_ns - start_ns; }
    bool          operator==(const RunSummary&) const = default;
};

/// Replays `w` against `runtime` through `dispatch`. A null `writer` runs
/// untraced. API failures are traced, not thrown; undefined variables and
/// writer errors throw.
RunSummary run_workload(const Workload& w, const codegen::DispatchTable& dispatch,
                        mock::MockRuntime& runtime, trace::TraceWriter* writer,
                        const DriverOptions& options = {});
}  // namespace hapi::workload
