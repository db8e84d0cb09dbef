#include "gen.hpp"

#include "hapi/aggregate/aggregate.hpp"
#include "hapi/cli/bench.hpp"
#include "hapi/cli/cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace hapi;
using testgen::TempDir;

namespace
{
struct Run
{
    int         rc = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "hapitrace");
    std::vector<const char*> argv;
    for(const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run                r;
    r.rc  = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream       in(text);
    for(std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

/// Schema name of a pretty line: the text between the third " - " and ": { ".
std::string schema_of(const std::string& line)
{
    std::size_t pos = 0;
    for(int i = 0; i < 3; ++i) pos = line.find(" - ", pos) + 3;
    return line.substr(pos, line.find(": { ", pos) - pos);
}
}  // namespace

TEST(Cli, UsageErrorsExitTwo)
{
    EXPECT_EQ(run({}).rc, 2);
    EXPECT_EQ(run({"frobnicate"}).rc, 2);
    EXPECT_EQ(run({"trace"}).rc, 2);
    EXPECT_EQ(run({"trace", "--mode", "loud", "W1"}).rc, 2);
    EXPECT_EQ(run({"trace", "--sample-period", "0", "W1"}).rc, 2);
    const auto bad_inject = run({"trace", "--inject", "gremlins", "W1"});
    EXPECT_EQ(bad_inject.rc, 2);
    EXPECT_NE(bad_inject.err.find("gremlins"), std::string::npos);
}

TEST(Cli, HelpExitsZero)
{
    const auto top = run({"--help"});
    EXPECT_EQ(top.rc, 0);
    EXPECT_NE(top.out.find("trace"), std::string::npos);
    const auto sub = run({"analyze", "--help"});
    EXPECT_EQ(sub.rc, 0);
    EXPECT_NE(sub.out.find("--timeline"), std::string::npos);
}

TEST(Cli, HarnessErrorsExitOne)
{
    TempDir tmp;
    EXPECT_EQ(run({"analyze", (tmp / "nothing").string()}).rc, 1);
    EXPECT_EQ(run({"trace", "--out", (tmp / "x").string(), (tmp / "missing.yaml").string()}).rc, 1);
    std::ofstream(tmp / "file") << "x";
    const auto r = run({"trace", "--out", (tmp / "file" / "sub").string(), "W3"});
    EXPECT_EQ(r.rc, 1);
    EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
}

TEST(Cli, TraceTallyEqualsAnalyzeTally)
{
    TempDir    tmp;
    const auto dir = (tmp / "w1").string();
    const auto t   = run({"trace", "--out", dir, "W1"});
    ASSERT_EQ(t.rc, 0) << t.err;
    EXPECT_NE(t.out.find("BACKEND_ZE | 1 Hostnames | 1 Processes | 1 Threads |"), std::string::npos);
    EXPECT_NE(t.err.find("4023 calls"), std::string::npos);
    const auto a = run({"analyze", dir});
    ASSERT_EQ(a.rc, 0) << a.err;
    EXPECT_EQ(a.out, t.out);
    EXPECT_EQ(run({"analyze", "--tally", dir}).out, t.out);
}

TEST(Cli, TracedApiErrorsDoNotFailTheRun)
{
    // W1's polling returns NOT_READY thousands of times.
    TempDir tmp;
    EXPECT_EQ(run({"trace", "--out", (tmp / "t").string(), "W1"}).rc, 0);
}

TEST(Cli, MinimalModeWritesOnlyMinimalSchemas)
{
    TempDir    tmp;
    const auto dir = (tmp / "m").string();
    ASSERT_EQ(run({"trace", "--mode", "minimal", "--out", dir, "W1"}).rc, 0);
    const auto p = run({"analyze", "--pretty", dir});
    ASSERT_EQ(p.rc, 0);
    const auto reg = session::mock_registry(schema::Scenario::hybrid);
    const auto ls  = lines(p.out);
    ASSERT_FALSE(ls.empty());
    std::set<std::string> seen;
    for(const auto& l : ls)
    {
        const auto* s = reg.find(schema_of(l));
        ASSERT_TRUE(s) << l;
        EXPECT_TRUE(s->modes.has(schema::TracingMode::minimal)) << s->name;
        seen.insert(s->name);
    }
    EXPECT_TRUE(seen.count("ze:zeMockCommandListAppendLaunchKernel_entry"));
    EXPECT_FALSE(seen.count("ze:zeMockEventHostSynchronize_entry"));
}

TEST(Cli, SampledTraceExportsCounters)
{
    TempDir    tmp;
    const auto dir = (tmp / "s").string();
    ASSERT_EQ(run({"trace", "--sample", "--sample-period", "1", "--out", dir, "W3"}).rc, 0);
    const auto json_path = (tmp / "tl.json").string();
    const auto a         = run({"analyze", "--timeline", json_path, dir});
    ASSERT_EQ(a.rc, 0) << a.err;
    EXPECT_TRUE(a.out.empty());
    std::ifstream in(json_path);
    const auto    j = nlohmann::json::parse(in);
    std::set<std::string> counters;
    for(const auto& o : j)
        if(o["ph"] == "C") counters.insert(o["name"].get<std::string>());
    EXPECT_EQ(counters.size(), 9u);
}

TEST(Cli, ValidateReportsInjectedDefects)
{
    TempDir    tmp;
    const auto bad = (tmp / "bad").string();
    ASSERT_EQ(run({"trace", "--inject", "uninit_pnext,leak_event", "--out", bad, "W1"}).rc, 0);
    const auto v = run({"analyze", "--validate", bad});
    EXPECT_EQ(v.rc, 1);
    EXPECT_NE(v.out.find("uninit_pnext: "), std::string::npos);
    EXPECT_NE(v.out.find("leaked_event: "), std::string::npos);
    EXPECT_NE(v.out.find("\n2 findings\n"), std::string::npos);

    const auto good = (tmp / "good").string();
    ASSERT_EQ(run({"trace", "--out", good, "W1"}).rc, 0);
    const auto c = run({"analyze", "--validate", good});
    EXPECT_EQ(c.rc, 0);
    EXPECT_EQ(c.out, "0 findings\n");
}

TEST(Cli, AggregateOnlyKeepsOneFile)
{
    TempDir    tmp;
    const auto dir = tmp / "agg";
    const auto r   = run({"trace", "--aggregate-only", "--ranks", "8", "--out", dir.string(), "W1"});
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_NE(r.out.find("| 8 Processes |"), std::string::npos);
    std::vector<std::string> names;
    for(const auto& e : std::filesystem::directory_iterator(dir)) names.push_back(e.path().filename().string());
    EXPECT_EQ(names, std::vector<std::string>{"tally.json"});
    EXPECT_EQ(aggregate::read_tally_file(dir / "tally.json").processes.size(), 8u);
}

TEST(Cli, MergeCombinesTallyFiles)
{
    TempDir    tmp;
    const auto a = tmp / "a";
    const auto b = tmp / "b";
    ASSERT_EQ(run({"trace", "--aggregate-only", "--ranks", "2", "--out", a.string(), "W3"}).rc, 0);
    ASSERT_EQ(run({"trace", "--aggregate-only", "--ranks", "3", "--out", b.string(), "W3"}).rc, 0);
    const auto out = tmp / "merged.json";
    const auto m   = run({"merge", "--out", out.string(), (a / "tally.json").string(), (b / "tally.json").string()});
    ASSERT_EQ(m.rc, 0) << m.err;
    const auto merged = aggregate::read_tally_file(out);
    const sinks::TallyReport parts[] = {aggregate::read_tally_file(a / "tally.json"),
                                        aggregate::read_tally_file(b / "tally.json")};
    EXPECT_EQ(merged, aggregate::merge_tallies(parts));
    EXPECT_EQ(m.out, sinks::render_tally(merged));
    EXPECT_EQ(run({"merge", (tmp / "none.json").string()}).rc, 1);
}

TEST(Cli, BenchPrintsEveryConfiguration)
{
    TempDir    tmp;
    const auto r = run({"bench", "--reps", "1", "--sample", "--scratch", (tmp / "s").string(), "W3"});
    ASSERT_EQ(r.rc, 0) << r.err;
    for(const auto* c : {"T-min", "T-default", "T-full", "TS-min", "TS-default", "TS-full"})
        EXPECT_NE(r.out.find(c), std::string::npos) << c;
    EXPECT_NE(r.out.find("ns/event"), std::string::npos);
}

TEST(Bench, RowsAreConsistent)
{
    TempDir           tmp;
    cli::BenchOptions o;
    o.reps    = 2;
    o.scratch = tmp / "s";
    const auto rep = cli::run_bench(session::load_workload("W1"), o);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_GT(rep.baseline_median_ns, 0u);
    const auto& min  = rep.rows[0];
    const auto& def  = rep.rows[1];
    const auto& full = rep.rows[2];
    EXPECT_EQ(min.config, "T-min");
    EXPECT_EQ(full.config, "T-full");
    // Event counts follow the mode masks; tracepoints do not depend on mode.
    EXPECT_LT(min.events, def.events);
    EXPECT_LT(def.events, full.events);
    EXPECT_EQ(full.events, full.tracepoints);
    EXPECT_EQ(min.tracepoints, full.tracepoints);
    EXPECT_LE(min.size_bytes, def.size_bytes);
    EXPECT_LE(def.size_bytes, full.size_bytes);
    EXPECT_FALSE(std::filesystem::exists(o.scratch) && !std::filesystem::is_empty(o.scratch));
    EXPECT_NE(cli::render_bench(rep).find("T-default"), std::string::npos);
}
