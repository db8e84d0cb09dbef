#pragma once

// Random entry/exit sequences with the spans a direct stack simulation
// expects from them.

#include "gen.hpp"

#include "hapi/pipeline/muxer.hpp"

#include <algorithm>
#include <tuple>

namespace hapi::testgen
{
inline const std::vector<trace::StreamId> oracle_streams = {{"a", 1, 1}, {"a", 1, 2}, {"a", 2, 1}, {"b", 1, 1}};

/// Host API names with their entry and exit schemas.
struct HostFn
{
    std::string                name;
    const schema::EventSchema* entry;
    const schema::EventSchema* exit;
};

inline std::vector<HostFn> host_functions(const schema::SchemaRegistry& reg)
{
    std::vector<HostFn> out;
    for(const auto& s : reg.schemas)
        if(s.cls == schema::EventClass::host_entry)
            out.push_back({s.function(), &s, reg.find(reg.api_name + ":" + s.function() + "_exit")});
    return out;
}

inline std::size_t field_index(const schema::EventSchema& s, std::string_view name)
{
    for(std::size_t i = 0; i < s.fields.size(); ++i)
        if(s.fields[i].name == name) return i;
    return s.fields.size();
}

/// Span identity used to compare oracle and builder output.
using SpanKey = std::tuple<trace::StreamId, std::string, std::uint64_t, std::uint64_t, bool, std::int64_t>;

inline SpanKey span_key(const pipeline::Span& s)
{
    return {s.stream, s.name, s.start_ns, s.end_ns, s.truncated, s.result};
}

struct IntervalScenario
{
    std::vector<std::unique_ptr<pipeline::StreamInput>> inputs;
    std::vector<SpanKey>                                spans;
    std::uint64_t                                       events  = 0;
    std::uint64_t                                       orphans = 0;
};

/// Well-nested sequences close only the innermost frame and close every
/// frame before the end. Otherwise exits may skip frames, name functions
/// with no open entry, or never come.
inline IntervalScenario gen_interval_scenario(Rng& r, const schema::SchemaRegistry& reg, std::size_t max_depth,
                                              bool well_nested, std::size_t max_steps = 60)
{
    const auto       fns = host_functions(reg);
    IntervalScenario sc;
    const auto       threads = r.between(1, oracle_streams.size());
    for(std::size_t t = 0; t < threads; ++t)
    {
        const auto&                     id = oracle_streams[t];
        std::vector<trace::EventRecord> recs;
        struct Open
        {
            std::string   name;
            std::uint64_t start;
        };
        std::vector<Open> stack;
        std::uint64_t     ts = r.between(0, 5);

        auto by_name = [&](const std::string& n) {
            return *std::find_if(fns.begin(), fns.end(), [&](const HostFn& f) { return f.name == n; });
        };
        auto emit_exit = [&](const HostFn& f) {
            auto       rec    = gen_record(r, *f.exit, ts);
            const auto ri     = field_index(*f.exit, "result");
            const bool has    = ri < rec.payload.size();
            const auto result = static_cast<std::int64_t>(r.chance(0.8) ? 0 : r.between(1, 5));
            if(has)
            {
                if(f.exit->fields[ri].kind == schema::FieldKind::i64)
                    rec.payload[ri] = result;
                else
                    rec.payload[ri] = static_cast<std::uint64_t>(result);
            }
            recs.push_back(std::move(rec));
            auto it = std::find_if(stack.rbegin(), stack.rend(), [&](const Open& o) { return o.name == f.name; });
            if(it == stack.rend())
            {
                ++sc.orphans;
                return;
            }
            const auto keep = static_cast<std::size_t>(stack.rend() - it) - 1;
            while(stack.size() > keep + 1)
            {
                sc.spans.emplace_back(id, stack.back().name, stack.back().start, ts, true, 0);
                stack.pop_back();
            }
            sc.spans.emplace_back(id, f.name, stack.back().start, ts, false, has ? result : 0);
            stack.pop_back();
        };

        const auto steps = r.between(0, max_steps);
        for(std::uint64_t i = 0; i < steps; ++i)
        {
            ts += r.between(0, 3);
            const double roll = std::uniform_real_distribution<double>(0, 1)(r.engine());
            if(stack.size() < max_depth && (stack.empty() ? roll < 0.9 : roll < 0.45))
            {
                const auto& f = r.pick(fns);
                recs.push_back(gen_record(r, *f.entry, ts));
                stack.push_back({f.name, ts});
            }
            else if(!stack.empty() && (well_nested || roll < 0.92))
            {
                // Mostly the innermost frame; sometimes an outer one.
                const bool inner = well_nested || r.chance(0.85);
                const auto depth = inner ? stack.size() - 1 : r.between(0, stack.size() - 1);
                emit_exit(by_name(stack[depth].name));
            }
            else if(!well_nested)
                emit_exit(r.pick(fns));  // often an orphan
        }
        if(well_nested)
            while(!stack.empty())
            {
                ts += r.between(0, 3);
                emit_exit(by_name(stack.back().name));
            }
        const auto last = recs.empty() ? 0 : recs.back().timestamp_ns;
        while(!stack.empty())
        {
            sc.spans.emplace_back(id, stack.back().name, stack.back().start, last, true, 0);
            stack.pop_back();
        }
        sc.events += recs.size();
        sc.inputs.push_back(pipeline::vector_input(id, std::move(recs)));
    }
    return sc;
}
}  // namespace hapi::testgen
