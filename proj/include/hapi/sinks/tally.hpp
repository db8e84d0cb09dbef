#pragma once

#include "hapi/error.hpp"
#include "hapi/pipeline/pipeline.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace hapi::sinks
{
enum class Section : std::uint8_t
{
    host,
    device,
};

struct TallyRow
{
    std::string   name;
    std::uint64_t time_ns     = 0;
    std::uint64_t count       = 0;
    std::uint64_t min_ns      = 0;
    std::uint64_t max_ns      = 0;
    std::uint64_t error_count = 0;  // host rows: nonzero results

    std::uint64_t average_ns() const noexcept { return count ? time_ns / count : 0; }
    bool          operator==(const TallyRow&) const = default;
};

struct ProcessId
{
    std::string   hostname;
    std::uint64_t pid = 0;

    auto operator<=>(const ProcessId&) const = default;
};

/// Per-name span aggregates. The empty report (fingerprint 0) is the merge
/// identity; fingerprint 0 matches any other.
struct TallyReport
{
    std::uint64_t                            fingerprint = 0;
    std::set<std::string>                    backends;  // "BACKEND_ZE"
    std::set<std::string>                    hostnames;
    std::set<ProcessId>                      processes;
    std::set<trace::StreamId>                threads;   // streams that produced spans
    std::map<trace::StreamId, std::uint64_t> dropped;   // streams with drops only
    std::vector<TallyRow>                    host;      // sorted by time desc, then name
    std::vector<TallyRow>                    device;

    const std::vector<TallyRow>& rows(Section s) const { return s == Section::host ? host : device; }
    const TallyRow*              find(Section s, std::string_view name) const;
    bool                         operator==(const TallyReport&) const = default;
};

/// Restores the canonical row order.
void sort_rows(std::vector<TallyRow>& rows);

/// Folds spans into a report. Header sets come from the spans' streams.
TallyReport tally_spans(std::span<const pipeline::Span> spans, std::uint64_t fingerprint = 0,
                        std::set<std::string> backends = {});

/// Fixed-width text: the header line, then the host table and the device
/// table, each with a Total row.
std::string render_tally(const TallyReport& report);

/// Scaled duration with two decimals: "4.73s", "500.91ms", "12.00us", "472.00ns".
std::string format_duration(std::uint64_t ns);
/// Share of `total` as a percentage with two decimals ("37.39").
std::string format_percent(std::uint64_t part, std::uint64_t total);

/// `*.tally.json` wire format.
std::string tally_to_json(const TallyReport& report);
TallyReport tally_from_json(std::string_view text);

/// Backend tag for an API name: "ze" -> "BACKEND_ZE".
std::string backend_tag(std::string_view api_name);

/// Incremental span fold.
class TallyBuilder
{
public:
    void add(const pipeline::Span& s);
    /// Adds the rows and header sets gathered so far to `base` and resets.
    TallyReport finish(TallyReport base = {});

private:
    std::set<std::string>           m_hostnames;
    std::set<ProcessId>             m_processes;
    std::set<trace::StreamId>       m_threads;
    std::map<std::string, TallyRow> m_host;
    std::map<std::string, TallyRow> m_device;
};

/// Builds a TallyReport from the interval tap.
class TallySink final : public pipeline::Sink
{
public:
    std::string_view name() const override { return "tally"; }
    void             on_start(const pipeline::PipelineContext& ctx) override;
    void             on_message(const pipeline::Message& msg) override;
    void             on_finish() override;

    const TallyReport& report() const noexcept { return m_report; }

private:
    TallyReport  m_base;
    TallyReport  m_report;
    TallyBuilder m_builder;
};
}  // namespace hapi::sinks
