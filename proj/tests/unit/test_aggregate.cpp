#include "gen.hpp"

#include "hapi/aggregate/aggregate.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace hapi;
using namespace hapi::aggregate;
using sinks::TallyReport;
using testgen::Rng;
using testgen::TempDir;

namespace
{
constexpr std::uint64_t fp = 0x1234;

/// Spans and drops of one synthetic rank; its report is the fold of these.
struct Part
{
    std::vector<pipeline::Span>                     spans;
    std::map<trace::StreamId, std::uint64_t>        dropped;
};

Part gen_part(Rng& r)
{
    Part p;
    p.spans = testgen::gen_spans(r, 30);
    if(!p.spans.empty() && r.chance(0.3)) p.dropped[p.spans.front().stream] = r.between(1, 9);
    return p;
}

TallyReport report_of(const Part& p)
{
    if(p.spans.empty() && p.dropped.empty()) return {};
    auto rep    = sinks::tally_spans(p.spans, fp, {"BACKEND_ZE"});
    rep.dropped = p.dropped;
    return rep;
}

/// Oracle: one fold over every rank's spans, drops summed per stream.
TallyReport fold_all(const std::vector<Part>& parts)
{
    Part all;
    for(const auto& p : parts)
    {
        all.spans.insert(all.spans.end(), p.spans.begin(), p.spans.end());
        for(const auto& [s, n] : p.dropped) all.dropped[s] += n;
    }
    return report_of(all);
}

std::size_t files_under(const std::filesystem::path& dir)
{
    if(!std::filesystem::exists(dir)) return 0;
    std::size_t n = 0;
    for(const auto& e : std::filesystem::recursive_directory_iterator(dir)) n += e.is_regular_file();
    return n;
}
}  // namespace

TEST(Merge, EmptyReportIsTheIdentity)
{
    Rng r(1);
    for(int i = 0; i < 100; ++i)
    {
        const auto a = testgen::gen_report(r, fp);
        EXPECT_EQ(merge({}, a), a);
        EXPECT_EQ(merge(a, {}), a);
    }
    EXPECT_EQ(merge_tallies({}), TallyReport{});
}

TEST(Merge, MatchesOneFoldOverAllSpans)
{
    Rng r(2);
    for(int iter = 0; iter < 300; ++iter)
    {
        std::vector<Part> parts(r.between(0, 6));
        for(auto& p : parts) p = gen_part(r);
        std::vector<TallyReport> reps;
        for(const auto& p : parts) reps.push_back(report_of(p));
        EXPECT_EQ(merge_tallies(reps), fold_all(parts)) << "iteration " << iter;
    }
}

TEST(Merge, AssociativeAndCommutative)
{
    Rng r(3);
    for(int iter = 0; iter < 300; ++iter)
    {
        const auto a = testgen::gen_report(r, fp);
        const auto b = testgen::gen_report(r, fp);
        const auto c = testgen::gen_report(r, fp);
        EXPECT_EQ(merge(merge(a, b), c), merge(a, merge(b, c)));
        EXPECT_EQ(merge(a, b), merge(b, a));
    }
}

TEST(Merge, HierarchicalEqualsFlat)
{
    Rng r(4);
    for(int iter = 0; iter < 200; ++iter)
    {
        std::vector<TallyReport> reps(r.between(0, 20));
        for(auto& x : reps) x = testgen::gen_report(r, fp);
        const auto node = r.between(1, 8);
        EXPECT_EQ(hierarchical_merge(reps, node), merge_tallies(reps)) << "node size " << node;
    }
    EXPECT_THROW(hierarchical_merge({}, 0), Error);
}

TEST(Merge, FingerprintMismatchThrows)
{
    Rng        r(5);
    const auto a = testgen::gen_report(r, 1);
    auto       b = a;
    b.fingerprint = 2;
    EXPECT_THROW(merge(a, b), MergeError);
    const TallyReport both[] = {a, b};
    EXPECT_THROW(merge_tallies(both), MergeError);
}

TEST(TallyFile, RoundTrip)
{
    TempDir    tmp;
    Rng        r(6);
    const auto rep = testgen::gen_report(r, fp);
    write_tally_file(tmp / "x.tally.json", rep);
    EXPECT_EQ(read_tally_file(tmp / "x.tally.json"), rep);
    EXPECT_THROW(read_tally_file(tmp / "missing.json"), Error);
    EXPECT_THROW(write_tally_file(tmp / "no" / "such" / "x.json", rep), Error);
    std::ofstream(tmp / "bad.json") << "[1, 2";
    EXPECT_THROW(read_tally_file(tmp / "bad.json"), SchemaError);
}

TEST(AggregateOnly, EightRanksLeaveOnlyTheResult)
{
    TempDir          tmp;
    AggregateOptions o;
    o.ranks          = 8;
    o.node_size      = 4;
    o.scratch        = tmp / "scratch";
    o.trace.hostname = "node";
    const auto w   = session::load_workload("W1");
    const auto rep = aggregate_only_run(w, o);

    EXPECT_FALSE(std::filesystem::exists(o.scratch));
    EXPECT_EQ(files_under(tmp.path()), 0u);
    EXPECT_EQ(rep.processes.size(), 8u);
    EXPECT_NE(sinks::render_tally(rep).find("| 8 Processes |"), std::string::npos);

    // Oracle: trace each rank on its own and merge flat.
    std::vector<TallyReport> ranks;
    for(std::size_t k = 0; k < o.ranks; ++k)
    {
        auto opts = o.trace;
        opts.pid  = rank_pid(o.trace.pid, k);
        const auto dir = tmp / ("r" + std::to_string(k));
        session::trace_workload(w, dir, opts);
        ranks.push_back(session::tally_trace(dir));
    }
    EXPECT_EQ(rep, merge_tallies(ranks));

    const auto one = ranks.front().find(sinks::Section::host, "zeMockCommandListAppendLaunchKernel");
    const auto all = rep.find(sinks::Section::host, "zeMockCommandListAppendLaunchKernel");
    ASSERT_TRUE(one && all);
    EXPECT_EQ(all->count, 8 * one->count);
}

TEST(AggregateOnly, ScratchIsRemovedOnFailure)
{
    TempDir          tmp;
    AggregateOptions o;
    o.ranks   = 2;
    o.scratch = tmp / "scratch";
    // A workload that fails at run time in every rank.
    const auto w = workload::parse_workload("name: bad\nsteps:\n  - {call: mem_free, args: {ptr: $nope}}\n");
    EXPECT_THROW(aggregate_only_run(w, o), Error);
    EXPECT_FALSE(std::filesystem::exists(o.scratch));
}

TEST(AggregateOnly, RejectsBadShapes)
{
    TempDir          tmp;
    AggregateOptions o;
    o.scratch  = tmp / "s";
    o.ranks    = 0;
    const auto w = session::load_workload("W3");
    EXPECT_THROW(aggregate_only_run(w, o), Error);
    o.ranks     = 1;
    o.node_size = 0;
    EXPECT_THROW(aggregate_only_run(w, o), Error);
}
