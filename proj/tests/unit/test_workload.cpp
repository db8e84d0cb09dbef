#include "gen.hpp"

#include "hapi/mock/bundled.hpp"
#include "hapi/session/session.hpp"
#include "hapi/trace/reader.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace hapi;
using namespace hapi::workload;
using testgen::TempDir;

namespace
{
std::string schema_error_path(const std::string& yaml)
{
    try
    {
        parse_workload(yaml);
    } catch(const SchemaError& e)
    {
        return e.path();
    }
    return "<no error>";
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream      in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// W1 by hand: 9 setup calls, 2 iterations of (2 copies, 8 kernels, close,
/// execute, sync, reset), 2 destroys and 4 frees. Sync count is data dependent.
const std::map<std::string, std::uint64_t> w1_counts = {
    {"zeMockInit", 1},
    {"zeMockDeviceGetProperties", 1},
    {"zeMockMemAlloc", 4},
    {"zeMockCommandListCreate", 1},
    {"zeMockEventCreate", 2},
    {"zeMockCommandListAppendMemoryCopy", 4},
    {"zeMockCommandListAppendLaunchKernel", 16},
    {"zeMockCommandListClose", 2},
    {"zeMockCommandListExecute", 2},
    {"zeMockCommandListReset", 2},
    {"zeMockEventDestroy", 2},
    {"zeMockMemFree", 4},
};
}  // namespace

TEST(WorkloadDsl, BundledWorkloadsParse)
{
    for(const auto& n : mock::bundled_workload_names())
    {
        const auto w = parse_workload(*mock::bundled_workload(n));
        EXPECT_EQ(w.name, n);
        EXPECT_FALSE(w.steps.empty());
    }
    EXPECT_EQ(parse_workload(*mock::bundled_workload("W1")).seed, 42u);
}

TEST(WorkloadDsl, StepShapes)
{
    const auto w = parse_workload(R"(
name: x
seed: 5
inject: [leak_event]
steps:
  - {call: init, as: dev}
  - repeat: 3
    steps:
      - {call: mem_alloc, args: {device: $dev, space: host, size: 0x40}, as: p, repeat: 2}
  - parallel: 2
    steps:
      - {call: host_compute, args: {ns: 10}, thread: 1}
      - {call: append_memory_copy, args: {list: $l, dst: $a, src: $b, size: 1, wait: [$e1, $e2]}}
)");
    EXPECT_EQ(w.inject, InjectionSet{Injection::leak_event});
    ASSERT_EQ(w.steps.size(), 3u);
    const auto& init = std::get<CallStep>(w.steps[0].body);
    EXPECT_EQ(init.op, Op::init);
    EXPECT_EQ(init.as, "dev");

    const auto& rep = std::get<BlockStep>(w.steps[1].body);
    EXPECT_EQ(rep.kind, BlockStep::Kind::repeat);
    EXPECT_EQ(rep.count, 3u);
    const auto& alloc = std::get<CallStep>(rep.steps[0].body);
    EXPECT_EQ(alloc.repeat, 2u);
    EXPECT_EQ(alloc.args.at("size").value, (ArgExpr{std::uint64_t{64}}.value));
    EXPECT_EQ(alloc.args.at("device").value, (ArgExpr{VarRef{"dev"}}.value));
    EXPECT_EQ(alloc.args.at("space").value, (ArgExpr{std::string("host")}.value));

    const auto& par = std::get<BlockStep>(w.steps[2].body);
    EXPECT_EQ(par.kind, BlockStep::Kind::parallel);
    EXPECT_EQ(std::get<CallStep>(par.steps[0].body).thread, 1u);
    const auto& waits = std::get<ArgList>(std::get<CallStep>(par.steps[1].body).args.at("wait").value);
    ASSERT_EQ(waits.size(), 2u);
    EXPECT_EQ(std::get<VarRef>(waits[1].value).name, "e2");
}

TEST(WorkloadDsl, ErrorsNameTheNode)
{
    EXPECT_EQ(schema_error_path("name: x\nsteps:\n  - {call: fly}\n"), "steps[0].call");
    EXPECT_EQ(schema_error_path("name: x\nsteps:\n  - {call: init}\n  - {call: mem_alloc, args: {device: 1, space: host}}\n"),
              "steps[1].args.size");
    EXPECT_EQ(schema_error_path("name: x\nsteps:\n  - repeat: 2\n    steps:\n      - {call: mem_free, args: {ptr: 1, bogus: 2}}\n"),
              "steps[0].steps[0].args.bogus");
    EXPECT_NE(schema_error_path("name: x\nsteps:\n  - {call: mem_free, args: {ptr: 1}, as: v}\n"), "<no error>");
    EXPECT_NE(schema_error_path("name: x\nsteps:\n  - {call: init, thread: 0}\n"), "<no error>");
    EXPECT_NE(schema_error_path("name: x\nsteps:\n  - parallel: 2\n    steps:\n      - parallel: 2\n        steps: []\n"),
              "<no error>");
    EXPECT_NE(schema_error_path("name: x\nsteps:\n  - {call: host_compute, args: {ns: 1, until_ns: 2}}\n"),
              "<no error>");
    EXPECT_NE(schema_error_path("name: x\ninject: [gremlins]\nsteps: []\n"), "<no error>");
    EXPECT_NE(schema_error_path("steps: [\n"), "<no error>");
}

TEST(WorkloadDsl, Injections)
{
    EXPECT_EQ(parse_injections(""), InjectionSet{});
    EXPECT_EQ(parse_injections("leak_event,uninit_pnext"),
              (InjectionSet{Injection::leak_event, Injection::uninit_pnext}));
    EXPECT_THROW(parse_injections("leak_event,nope"), SchemaError);
    for(auto i : {Injection::uninit_pnext, Injection::leak_event, Injection::no_reset_cmdlist})
        EXPECT_EQ(injection_from_string(to_string(i)), i);
}

TEST(WorkloadDsl, OpsMapToFunctions)
{
    EXPECT_EQ(function_of(Op::append_memory_copy), "zeMockCommandListAppendMemoryCopy");
    EXPECT_EQ(function_of(Op::host_compute), "");
    EXPECT_EQ(op_from_string("event_host_synchronize"), Op::event_host_synchronize);
    EXPECT_FALSE(op_from_string("nope"));
}

TEST(Driver, W1CallCounts)
{
    const auto s = session::run_untraced(session::load_workload("W1")).summary;
    auto       counts = s.call_counts;
    const auto syncs  = counts["zeMockEventHostSynchronize"];
    counts.erase("zeMockEventHostSynchronize");
    EXPECT_EQ(counts, w1_counts);
    EXPECT_GT(syncs, 2u);
    std::uint64_t total = syncs;
    for(const auto& [_, n] : w1_counts) total += n;
    EXPECT_EQ(s.total_calls, total);
    // Every sync call but the last of each iteration reports NOT_READY.
    EXPECT_EQ(s.failed_calls, syncs - 2);
}

TEST(Driver, VirtualDurationAddsUpHostCosts)
{
    // Polls cost 100 ns, every other call 500 ns, no host_compute in W1.
    const auto s     = session::run_untraced(session::load_workload("W1")).summary;
    const auto syncs = s.call_counts.at("zeMockEventHostSynchronize");
    EXPECT_EQ(s.virtual_duration_ns(), (s.total_calls - syncs) * 500 + syncs * 100);
}

TEST(Driver, HostComputeAdvancesTheClock)
{
    const auto w = parse_workload("name: hc\nsteps:\n  - {call: host_compute, args: {ns: 1234}}\n"
                                  "  - {call: host_compute, args: {until_ns: 10000}}\n"
                                  "  - {call: host_compute, args: {until_ns: 50}}\n");
    const auto s = session::run_untraced(w).summary;
    EXPECT_EQ(s.virtual_duration_ns(), 10000u);
    EXPECT_EQ(s.total_calls, 0u);
}

TEST(Driver, InjectionsFireOnce)
{
    session::TraceOptions o;
    o.inject = {Injection::leak_event, Injection::no_reset_cmdlist};
    const auto s = session::run_untraced(session::load_workload("W1"), o).summary;
    EXPECT_EQ(s.call_counts.at("zeMockEventDestroy"), 1u);
    EXPECT_EQ(s.call_counts.at("zeMockCommandListReset"), 1u);
}

TEST(Driver, BadArgumentsThrowAtRunTime)
{
    const auto ghost = parse_workload("name: u\nsteps:\n  - {call: mem_free, args: {ptr: $ghost}}\n");
    EXPECT_THROW(session::run_untraced(ghost), Error);
    const auto space = parse_workload("name: s\nsteps:\n  - {call: init, as: d}\n"
                                      "  - {call: mem_alloc, args: {device: $d, space: shared, size: 1}}\n");
    EXPECT_THROW(session::run_untraced(space), Error);
}

TEST(Driver, ParallelWorkersGetTheirOwnStreams)
{
    TempDir    tmp;
    const auto r = session::trace_workload(session::load_workload("W2"), tmp / "t");
    std::set<std::uint64_t> tids;
    for(const auto& s : r.streams) tids.insert(s.id.tid);
    EXPECT_EQ(tids, (std::set<std::uint64_t>{main_tid(default_pid), worker_tid(default_pid, 0),
                                             worker_tid(default_pid, 1), worker_tid(default_pid, 2),
                                             worker_tid(default_pid, 3)}));
    EXPECT_EQ(r.summary.call_counts.at("zeMockCommandListCreate"), 4u);
    EXPECT_EQ(r.summary.call_counts.at("zeMockCommandListAppendLaunchKernel"), 12u);
}

TEST(Driver, RealThreadsRunTheSameCalls)
{
    session::TraceOptions o;
    o.wall_clock = true;
    const auto w    = session::load_workload("W2");
    const auto real = session::run_untraced(w, o).summary;
    const auto virt = session::run_untraced(w).summary;
    auto a = real.call_counts;
    auto b = virt.call_counts;
    a.erase("zeMockEventHostSynchronize");
    b.erase("zeMockEventHostSynchronize");
    EXPECT_EQ(a, b);
}

TEST(Driver, TracedRunsAreByteIdentical)
{
    TempDir    tmp;
    const auto w = session::load_workload("W1");
    const auto a = session::trace_workload(w, tmp / "a");
    const auto b = session::trace_workload(w, tmp / "b");
    EXPECT_EQ(a.summary, b.summary);
    ASSERT_EQ(a.streams, b.streams);
    for(const auto& s : a.streams) EXPECT_EQ(slurp(tmp / "a" / s.file), slurp(tmp / "b" / s.file)) << s.file;
}

TEST(Driver, InterleavingIsDeterministic)
{
    TempDir    tmp;
    const auto w = session::load_workload("W2");
    const auto a = session::trace_workload(w, tmp / "a");
    const auto b = session::trace_workload(w, tmp / "b");
    ASSERT_EQ(a.streams, b.streams);
    for(const auto& s : a.streams) EXPECT_EQ(slurp(tmp / "a" / s.file), slurp(tmp / "b" / s.file)) << s.file;
}

TEST(Session, LoadsFilesAndBundledNames)
{
    TempDir tmp;
    std::ofstream(tmp / "w.yaml") << "name: f\nsteps:\n  - {call: init}\n";
    EXPECT_EQ(session::load_workload((tmp / "w.yaml").string()).name, "f");
    EXPECT_EQ(session::load_workload("W3").name, "W3");
    EXPECT_THROW(session::load_workload((tmp / "missing.yaml").string()), Error);
}
