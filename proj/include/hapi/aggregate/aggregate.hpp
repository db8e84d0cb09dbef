#pragma once

#include "hapi/session/session.hpp"
#include "hapi/sinks/tally.hpp"

#include <filesystem>
#include <span>

namespace hapi::aggregate
{
/// Reports built from different API models.
class MergeError : public Error
{
public:
    using Error::Error;
};

/// Rows combine by (section, name); header sets are unioned. An empty
/// report (fingerprint 0) is the identity.
sinks::TallyReport merge(const sinks::TallyReport& a, const sinks::TallyReport& b);
sinks::TallyReport merge_tallies(std::span<const sinks::TallyReport> reports);

/// Local masters merge consecutive groups of `node_size` ranks, then the
/// global master merges the node results.
sinks::TallyReport hierarchical_merge(std::span<const sinks::TallyReport> ranks, std::size_t node_size = 4);

sinks::TallyReport read_tally_file(const std::filesystem::path& file);
void               write_tally_file(const std::filesystem::path& file, const sinks::TallyReport& report);

/// Pid of rank `r` when the base options use `base_pid`.
constexpr std::uint64_t rank_pid(std::uint64_t base_pid, std::size_t r) noexcept
{
    return base_pid + 10'000 * r;
}

struct AggregateOptions
{
    std::size_t            ranks     = 1;
    std::size_t            node_size = 4;
    std::filesystem::path  scratch;  // created if missing, removed afterwards
    session::TraceOptions  trace;
};

/// Traces `ranks` copies of `w` one after another, keeps only each rank's
/// tally and merges them hierarchically. No stream files survive.
sinks::TallyReport aggregate_only_run(const workload::Workload& w, const AggregateOptions& options);
}  // namespace hapi::aggregate
