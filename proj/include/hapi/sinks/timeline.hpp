#pragma once

#include "hapi/pipeline/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>

namespace hapi::sinks
{
/// Synthetic thread id of the device track for (device, tile, engine).
/// Engine 0 is compute, 1 is copy.
std::uint64_t device_track_tid(std::uint64_t device, std::uint64_t tile, unsigned engine);

/// Chrome trace-event JSON array: `X` events for spans (host spans on their
/// own (pid, tid), device spans on per-engine device tracks named by `M`
/// thread_name events) and `C` events for telemetry. Times in microseconds.
/// Every object carries name, ph, ts, pid and tid.
class TimelineSink final : public pipeline::Sink
{
public:
    /// The file is opened in on_start; failure raises there.
    explicit TimelineSink(std::filesystem::path out);

    std::string_view name() const override { return "timeline"; }
    void             on_start(const pipeline::PipelineContext& ctx) override;
    void             on_message(const pipeline::Message& msg) override;
    void             on_finish() override;

    std::uint64_t objects_written() const noexcept { return m_objects; }

private:
    void write(const std::string& object);

    std::filesystem::path m_path;
    std::ofstream         m_out;
    std::set<std::pair<std::uint64_t, std::uint64_t>> m_named_tracks;  // (pid, tid)
    std::uint64_t         m_objects = 0;
};
}  // namespace hapi::sinks
