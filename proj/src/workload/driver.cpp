#include "hapi/workload/driver.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>

#include <sys/mman.h>

#include <cstring>
#include <exception>
#include <mutex>
#include <new>
#include <random>
#include <thread>

namespace hapi::workload
{
namespace
{
using codegen::ArgValue;

void* to_ptr(std::uint64_t v) { return reinterpret_cast<void*>(static_cast<std::uintptr_t>(v)); }

/// Memory behind the pointers the driver passes (out slots, property
/// blocks, wait lists, kernel names). Mapped at a fixed host address when
/// possible so traced address payloads repeat across runs.
class Arena
{
public:
    static constexpr std::size_t slot_size = 64 * 1024;

    explicit Arena(std::size_t slots) : m_size(slots * slot_size)
    {
        constexpr std::uintptr_t base = 0x0000100000000000ULL;
        constexpr std::uintptr_t step = 0x40000000ULL;
        for(int i = 0; i < 64 && !m_mem; ++i)
        {
            void* p = ::mmap(reinterpret_cast<void*>(base + i * step), m_size, PROT_READ | PROT_WRITE,
                             MAP_PRIVATE | MAP_ANONYMOUS | MAP_FIXED_NOREPLACE, -1, 0);
            if(p == MAP_FAILED) continue;
            if(p != reinterpret_cast<void*>(base + i * step))
            {
                // Kernels without MAP_FIXED_NOREPLACE treat the address as a hint.
                ::munmap(p, m_size);
                continue;
            }
            m_mem = static_cast<std::byte*>(p);
        }
        if(!m_mem)
        {
            void* p = ::mmap(nullptr, m_size, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
            if(p == MAP_FAILED) throw std::bad_alloc();
            m_mem = static_cast<std::byte*>(p);
        }
    }
    Arena(const Arena&)            = delete;
    Arena& operator=(const Arena&) = delete;
    ~Arena() { ::munmap(m_mem, m_size); }

    std::byte* slot(std::size_t i) const { return m_mem + i * slot_size; }

private:
    std::size_t m_size;
    std::byte*  m_mem = nullptr;
};

/// Largest parallel width anywhere in the step tree.
std::size_t max_parallel(const std::vector<Step>& steps)
{
    std::size_t n = 0;
    for(const auto& s : steps)
        if(const auto* b = std::get_if<BlockStep>(&s.body))
            n = std::max<std::size_t>({n, b->kind == BlockStep::Kind::parallel ? b->count : 0,
                                       max_parallel(b->steps)});
    return n;
}

class Scope
{
public:
    explicit Scope(const Scope* parent = nullptr) : m_parent(parent) {}

    void set(const std::string& name, std::uint64_t v) { m_vars[name] = v; }

    std::uint64_t get(const std::string& name) const
    {
        for(const auto* s = this; s; s = s->m_parent)
            if(auto it = s->m_vars.find(name); it != s->m_vars.end()) return it->second;
        throw Error(fmt::format("workload: undefined variable '${}'", name));
    }

private:
    const Scope*                         m_parent;
    std::map<std::string, std::uint64_t> m_vars;
};

/// State shared by every worker of one run.
struct Run
{
    const Workload&               workload;
    const codegen::DispatchTable& dispatch;
    mock::MockRuntime&            runtime;
    trace::TraceWriter*           writer;
    const DriverOptions&          options;
    const trace::ClockSource&     clock;
    InjectionSet                  inject;
    std::uint64_t                 start_ns = 0;
    std::uint64_t                 pnext_garbage;
    Arena                         arena;

    std::mutex    mutex;  // guards the flags below and on_progress
    bool          pnext_done = false;
    bool          leak_done  = false;
    bool          reset_done = false;

    Run(const Workload& w, const codegen::DispatchTable& d, mock::MockRuntime& r,
        trace::TraceWriter* wr, const DriverOptions& o)
    : workload(w), dispatch(d), runtime(r), writer(wr), options(o),
      clock(o.trace_clock ? *o.trace_clock : r.clock()), inject(w.inject), arena(1 + max_parallel(w.steps))
    {
        inject.insert(o.inject.begin(), o.inject.end());
        std::mt19937_64 rng(w.seed);
        // Looks like a stale stack address; never zero.
        pnext_garbage = (rng() & 0x00007ffffffffff0ULL) | 0x10;
    }

    /// True exactly once per run for an active injection.
    bool take(Injection i, bool& done)
    {
        if(!inject.contains(i)) return false;
        std::lock_guard lk(mutex);
        if(done) return false;
        done = true;
        return true;
    }

    void progress()
    {
        if(!options.on_progress) return;
        std::lock_guard lk(mutex);
        options.on_progress();
    }
};

class Worker
{
public:
    Worker(Run& run, std::optional<unsigned> index, std::uint64_t tid, const std::vector<Step>& steps,
           const Scope* parent)
    : m_run(run), m_index(index), m_scope(parent), m_slot(run.arena.slot(index ? *index + 1 : 0))
    {
        if(run.writer) m_stream = &run.writer->stream(run.options.pid, tid);
        if(index)
        {
            m_scope.set("thread", *index);
            m_scope.set("tile", *index % mock::tile_count);
        }
        m_stack.push_back(Frame{&steps, 0, 0, 1});
    }

    /// Performs one unit of work. False once the worker is finished.
    bool step()
    {
        while(!m_stack.empty())
        {
            auto& f = m_stack.back();
            if(f.pc == f.steps->size())
            {
                if(++f.iter < f.count)
                {
                    f.pc = 0;
                    continue;
                }
                m_stack.pop_back();
                if(!m_stack.empty()) ++m_stack.back().pc;
                continue;
            }
            const auto& s = (*f.steps)[f.pc];
            if(const auto* b = std::get_if<BlockStep>(&s.body))
            {
                if(b->kind == BlockStep::Kind::parallel)
                {
                    run_parallel(*b);
                    ++f.pc;
                    return true;
                }
                if(b->count == 0 || b->steps.empty())
                {
                    ++f.pc;
                    continue;
                }
                m_stack.push_back(Frame{&b->steps, 0, 0, b->count});
                continue;
            }
            const auto& c = std::get<CallStep>(s.body);
            if(c.repeat == 0 || (c.thread && m_index != c.thread))
            {
                ++f.pc;
                continue;
            }
            if(perform(c) && ++m_rep == c.repeat)
            {
                m_rep = 0;
                ++f.pc;
            }
            m_run.progress();
            return true;
        }
        return false;
    }

    void merge_into(RunSummary& s) const
    {
        for(const auto& [k, v] : m_counts) s.call_counts[k] += v;
        s.total_calls += m_total;
        s.failed_calls += m_failed;
    }

private:
    struct Frame
    {
        const std::vector<Step>* steps;
        std::size_t              pc;
        std::uint64_t            iter;
        std::uint64_t            count;
    };

    void run_parallel(const BlockStep& b)
    {
        std::vector<std::unique_ptr<Worker>> workers;
        for(unsigned k = 0; k < b.count; ++k)
            workers.push_back(std::make_unique<Worker>(m_run, k, worker_tid(m_run.options.pid, k),
                                                       b.steps, &m_scope));
        if(m_run.options.threading == Threading::interleaved)
        {
            bool any = true;
            while(any)
            {
                any = false;
                for(auto& w : workers) any = w->step() || any;
            }
        }
        else
        {
            std::vector<std::exception_ptr> errors(workers.size());
            {
                std::vector<std::jthread> threads;
                for(std::size_t k = 0; k < workers.size(); ++k)
                    threads.emplace_back([&, k] {
                        try
                        {
                            while(workers[k]->step())
                            {
                            }
                        } catch(...)
                        {
                            errors[k] = std::current_exception();
                        }
                    });
            }
            for(auto& e : errors)
                if(e) std::rethrow_exception(e);
        }
        for(const auto& w : workers)
        {
            for(const auto& [k, v] : w->m_counts) m_counts[k] += v;
            m_total += w->m_total;
            m_failed += w->m_failed;
        }
    }

    std::uint64_t value(const ArgExpr& e, std::string_view what) const
    {
        if(const auto* v = std::get_if<std::uint64_t>(&e.value)) return *v;
        if(const auto* r = std::get_if<VarRef>(&e.value)) return m_scope.get(r->name);
        throw Error(fmt::format("workload: argument '{}' must be an integer or variable", what));
    }

    std::uint64_t arg(const CallStep& c, const std::string& key, std::uint64_t fallback = 0) const
    {
        auto it = c.args.find(key);
        return it == c.args.end() ? fallback : value(it->second, key);
    }

    std::string text(const CallStep& c, const std::string& key) const
    {
        const auto& e = c.args.at(key);
        if(const auto* s = std::get_if<std::string>(&e.value)) return *s;
        return std::to_string(value(e, key));
    }

    std::int64_t call(Op op, std::span<const ArgValue> args)
    {
        const auto          name = function_of(op);
        codegen::CallContext ctx{m_stream, &m_run.clock};
        const auto          r = m_run.dispatch.invoke(ctx, name, args);
        ++m_counts[std::string(name)];
        ++m_total;
        if(r != 0) ++m_failed;
        return r;
    }

    // Slot layout: out value, property block, wait list, kernel name.
    static constexpr std::size_t props_at = 64;
    static constexpr std::size_t waits_at = 256;
    static constexpr std::size_t name_at  = Arena::slot_size / 2;
    static constexpr std::size_t max_waits = (name_at - waits_at) / sizeof(ze_event_handle_t);

    /// One traced call (or host compute). False while a poll is pending.
    bool perform(const CallStep& c)
    {
        auto& out = *new(m_slot) std::uint64_t{0};
        switch(c.op)
        {
            case Op::init:
            {
                const ArgValue a[] = {arg(c, "flags"), static_cast<void*>(&out)};
                call(c.op, a);
                break;
            }
            case Op::get_device_properties:
            {
                auto& props = *new(m_slot + props_at) ze_device_properties_t{};
                if(m_run.take(Injection::uninit_pnext, m_run.pnext_done)) props.pNext = to_ptr(m_run.pnext_garbage);
                const ArgValue a[] = {to_ptr(arg(c, "device")), static_cast<void*>(&props)};
                call(c.op, a);
                break;
            }
            case Op::mem_alloc:
            {
                const auto  space_text = text(c, "space");
                std::int64_t space     = 0;
                if(space_text == "host")
                    space = ZE_MEM_SPACE_HOST;
                else if(space_text == "device")
                    space = ZE_MEM_SPACE_DEVICE;
                else
                    space = static_cast<std::int64_t>(value(c.args.at("space"), "space"));
                const ArgValue a[] = {to_ptr(arg(c, "device")), space, arg(c, "size"), static_cast<void*>(&out)};
                call(c.op, a);
                break;
            }
            case Op::mem_free:
            {
                const ArgValue a[] = {to_ptr(arg(c, "ptr"))};
                call(c.op, a);
                break;
            }
            case Op::cmdlist_create:
            {
                const ArgValue a[] = {to_ptr(arg(c, "device")), arg(c, "tile"), static_cast<void*>(&out)};
                call(c.op, a);
                break;
            }
            case Op::append_memory_copy:
            {
                std::vector<ze_event_handle_t> list;
                if(auto it = c.args.find("wait"); it != c.args.end())
                {
                    if(const auto* l = std::get_if<ArgList>(&it->second.value))
                        for(const auto& e : *l)
                            list.push_back(static_cast<ze_event_handle_t>(to_ptr(value(e, "wait"))));
                    else
                        list.push_back(static_cast<ze_event_handle_t>(to_ptr(value(it->second, "wait"))));
                }
                if(list.size() > max_waits) throw Error(fmt::format("workload: more than {} wait events", max_waits));
                auto* waits = reinterpret_cast<ze_event_handle_t*>(m_slot + waits_at);
                std::copy(list.begin(), list.end(), waits);
                const ArgValue a[] = {to_ptr(arg(c, "list")),
                                      to_ptr(arg(c, "dst")),
                                      to_ptr(arg(c, "src")),
                                      arg(c, "size"),
                                      to_ptr(arg(c, "signal")),
                                      std::uint64_t{list.size()},
                                      list.empty() ? nullptr : static_cast<void*>(waits)};
                call(c.op, a);
                break;
            }
            case Op::append_launch_kernel:
            {
                const auto text_name = text(c, "name");
                const auto len       = std::min(text_name.size(), Arena::slot_size - name_at - 1);
                auto*      name      = reinterpret_cast<char*>(m_slot + name_at);
                std::memcpy(name, text_name.data(), len);
                name[len]           = '\0';
                const ArgValue a[]  = {to_ptr(arg(c, "list")), static_cast<const char*>(name), arg(c, "groups"),
                                       to_ptr(arg(c, "signal"))};
                call(c.op, a);
                break;
            }
            case Op::cmdlist_reset:
                if(m_run.take(Injection::no_reset_cmdlist, m_run.reset_done)) return true;
                [[fallthrough]];
            case Op::cmdlist_close:
            case Op::cmdlist_execute:
            {
                const ArgValue a[] = {to_ptr(arg(c, "list"))};
                call(c.op, a);
                break;
            }
            case Op::event_create:
            {
                const ArgValue a[] = {to_ptr(arg(c, "device")), static_cast<void*>(&out)};
                call(c.op, a);
                break;
            }
            case Op::event_destroy:
            {
                if(m_run.take(Injection::leak_event, m_run.leak_done)) return true;
                const ArgValue a[] = {to_ptr(arg(c, "event"))};
                call(c.op, a);
                break;
            }
            case Op::event_host_synchronize:
            {
                const ArgValue a[] = {to_ptr(arg(c, "event")), arg(c, "timeout")};
                return call(c.op, a) != ZE_RESULT_NOT_READY;
            }
            case Op::host_compute:
            {
                auto& clock = m_run.runtime.clock();
                if(c.args.contains("ns"))
                    clock.advance(arg(c, "ns"));
                else
                    clock.advance_to(m_run.start_ns + arg(c, "until_ns"));
                return true;
            }
        }
        if(c.as) m_scope.set(*c.as, out);
        return true;
    }

    Run&                                 m_run;
    std::optional<unsigned>              m_index;
    Scope                                m_scope;
    std::byte*                           m_slot;
    trace::ThreadStream*                 m_stream = nullptr;
    std::vector<Frame>                   m_stack;
    std::uint64_t                        m_rep = 0;
    std::map<std::string, std::uint64_t> m_counts;
    std::uint64_t                        m_total  = 0;
    std::uint64_t                        m_failed = 0;
};
}  // namespace

RunSummary run_workload(const Workload& w, const codegen::DispatchTable& dispatch,
                        mock::MockRuntime& runtime, trace::TraceWriter* writer,
                        const DriverOptions& options)
{
    Run run(w, dispatch, runtime, writer, options);
    run.start_ns = runtime.clock().now_ns();

    Worker main(run, std::nullopt, main_tid(options.pid), w.steps, nullptr);
    while(main.step())
    {
    }

    RunSummary s;
    s.start_ns = run.start_ns;
    s.end_ns   = runtime.clock().now_ns();
    main.merge_into(s);
    return s;
}
}  // namespace hapi::workload
