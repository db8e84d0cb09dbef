#include "hapi/aggregate/aggregate.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>

namespace hapi::aggregate
{
namespace
{
namespace fs = std::filesystem;

void merge_rows(std::vector<sinks::TallyRow>& into, const std::vector<sinks::TallyRow>& from)
{
    std::map<std::string, std::size_t> index;
    for(std::size_t i = 0; i < into.size(); ++i) index.emplace(into[i].name, i);
    for(const auto& r : from)
    {
        auto it = index.find(r.name);
        if(it == index.end())
        {
            index.emplace(r.name, into.size());
            into.push_back(r);
            continue;
        }
        auto& t = into[it->second];
        t.time_ns += r.time_ns;
        t.count += r.count;
        t.min_ns = std::min(t.min_ns, r.min_ns);
        t.max_ns = std::max(t.max_ns, r.max_ns);
        t.error_count += r.error_count;
    }
    sinks::sort_rows(into);
}

/// Removes the scratch tree on every exit path.
struct ScratchGuard
{
    fs::path dir;
    ~ScratchGuard()
    {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
};
}  // namespace

sinks::TallyReport merge(const sinks::TallyReport& a, const sinks::TallyReport& b)
{
    if(a.fingerprint && b.fingerprint && a.fingerprint != b.fingerprint)
        throw MergeError(fmt::format("fingerprint mismatch: {:016x} vs {:016x}", a.fingerprint, b.fingerprint));
    sinks::TallyReport out = a;
    if(!out.fingerprint) out.fingerprint = b.fingerprint;
    out.backends.insert(b.backends.begin(), b.backends.end());
    out.hostnames.insert(b.hostnames.begin(), b.hostnames.end());
    out.processes.insert(b.processes.begin(), b.processes.end());
    out.threads.insert(b.threads.begin(), b.threads.end());
    for(const auto& [s, n] : b.dropped) out.dropped[s] += n;
    merge_rows(out.host, b.host);
    merge_rows(out.device, b.device);
    return out;
}

sinks::TallyReport merge_tallies(std::span<const sinks::TallyReport> reports)
{
    sinks::TallyReport out;
    for(const auto& r : reports) out = merge(out, r);
    return out;
}

sinks::TallyReport hierarchical_merge(std::span<const sinks::TallyReport> ranks, std::size_t node_size)
{
    if(node_size == 0) throw Error("node size must be at least 1");
    std::vector<sinks::TallyReport> nodes;
    for(std::size_t i = 0; i < ranks.size(); i += node_size)
        nodes.push_back(merge_tallies(ranks.subspan(i, std::min(node_size, ranks.size() - i))));
    return merge_tallies(nodes);
}

sinks::TallyReport read_tally_file(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if(!in) throw Error("cannot read tally '" + file.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return sinks::tally_from_json(ss.str());
}

void write_tally_file(const fs::path& file, const sinks::TallyReport& report)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if(!out) throw Error("cannot write tally '" + file.string() + "'");
    out << sinks::tally_to_json(report);
    if(!out.flush()) throw Error("cannot write tally '" + file.string() + "'");
}

sinks::TallyReport aggregate_only_run(const workload::Workload& w, const AggregateOptions& options)
{
    if(options.ranks == 0) throw Error("aggregate-only run needs at least one rank");
    if(options.node_size == 0) throw Error("node size must be at least 1");
    std::error_code ec;
    fs::create_directories(options.scratch, ec);
    if(ec || !fs::is_directory(options.scratch))
        throw Error("scratch directory '" + options.scratch.string() + "' is not writable");
    ScratchGuard guard{options.scratch};

    // Each rank leaves only its tally file behind.
    std::vector<fs::path> rank_files;
    for(std::size_t r = 0; r < options.ranks; ++r)
    {
        auto opts = options.trace;
        opts.pid  = rank_pid(options.trace.pid, r);
        const auto trace_dir = options.scratch / fmt::format("rank{}.trace", r);
        session::trace_workload(w, trace_dir, opts);
        auto report = session::tally_trace(trace_dir);
        fs::remove_all(trace_dir);
        rank_files.push_back(options.scratch / fmt::format("rank{}.tally.json", r));
        write_tally_file(rank_files.back(), report);
    }

    // Local masters, then the global master, exchanging files.
    std::vector<sinks::TallyReport> nodes;
    for(std::size_t i = 0, n = 0; i < rank_files.size(); i += options.node_size, ++n)
    {
        std::vector<sinks::TallyReport> group;
        for(std::size_t j = i; j < std::min(i + options.node_size, rank_files.size()); ++j)
            group.push_back(read_tally_file(rank_files[j]));
        const auto node_file = options.scratch / fmt::format("node{}.tally.json", n);
        write_tally_file(node_file, merge_tallies(group));
        nodes.push_back(read_tally_file(node_file));
    }
    return merge_tallies(nodes);
}
}  // namespace hapi::aggregate
