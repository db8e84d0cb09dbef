#include "hapi/mock/runtime.hpp"

#include <algorithm>

namespace hapi::mock
{
namespace
{
std::uint64_t bits(const void* p) { return reinterpret_cast<std::uintptr_t>(p); }

template <typename T>
T from_bits(std::uint64_t v)
{
    return reinterpret_cast<T>(static_cast<std::uintptr_t>(v));
}

std::uint64_t round_up(std::uint64_t v, std::uint64_t a) { return (v + a - 1) / a * a; }

bool is_device_address(std::uint64_t a) { return (a >> 56) == 0xff; }
}  // namespace

MockRuntime::MockRuntime(trace::VirtualClock& clock, CostTable costs)
: m_clock(clock)
, m_costs(costs)
{
}

std::uint64_t MockRuntime::tick(std::uint64_t cost) { return m_clock.advance(cost); }

std::uint64_t MockRuntime::next_handle() { return handle_base + 0x40 * m_handles++; }

bool MockRuntime::valid_device(ze_device_handle_t h) const
{
    return m_initialized && bits(h) == m_device;
}

const MockRuntime::Allocation* MockRuntime::owning_allocation(std::uint64_t addr) const
{
    auto it = m_allocs.upper_bound(addr);
    if(it == m_allocs.begin()) return nullptr;
    --it;
    return addr < it->first + it->second.size ? &it->second : nullptr;
}

std::string MockRuntime::copy_name(std::uint64_t dst, std::uint64_t src) const
{
    const char s = is_device_address(src) ? 'D' : 'H';
    const char d = is_device_address(dst) ? 'D' : 'H';
    return std::string("memcpy(") + s + "2" + d + ")";
}

ze_result_t MockRuntime::init(std::uint32_t, ze_device_handle_t* phDevice)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!phDevice) return ZE_RESULT_ERROR_INVALID_NULL_POINTER;
    if(!m_initialized)
    {
        m_device      = next_handle();
        m_initialized = true;
    }
    *phDevice = from_bits<ze_device_handle_t>(m_device);
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::get_device_properties(ze_device_handle_t hDevice, ze_device_properties_t* props)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    if(!valid_device(hDevice)) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(!props) return ZE_RESULT_ERROR_INVALID_NULL_POINTER;
    if(props->pNext)
    {
        props->vendorId        = poison_u32;
        props->deviceId        = poison_u32;
        props->numTiles        = poison_u32;
        props->coreClockRate   = poison_u32;
        props->maxMemAllocSize = poison_u64;
        return ZE_RESULT_SUCCESS;
    }
    props->vendorId        = 0x8086;
    props->deviceId        = 0x0bd5;
    props->numTiles        = tile_count;
    props->coreClockRate   = 1600;
    props->maxMemAllocSize = std::uint64_t{64} << 30;
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::mem_alloc(ze_device_handle_t hDevice, ze_mem_space_t space, std::size_t size,
                                   void** pptr)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    if(!valid_device(hDevice)) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(!pptr) return ZE_RESULT_ERROR_INVALID_NULL_POINTER;
    if(size == 0 || (space != ZE_MEM_SPACE_HOST && space != ZE_MEM_SPACE_DEVICE))
        return ZE_RESULT_ERROR_INVALID_ARGUMENT;
    auto& next = space == ZE_MEM_SPACE_HOST ? m_host_next : m_device_next;
    const auto base = next;
    next += round_up(size, allocation_alignment);
    m_allocs.emplace(base, Allocation{size, space, false});
    *pptr = from_bits<void*>(base);
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::mem_free(void* ptr)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    auto it = m_allocs.find(bits(ptr));
    if(it == m_allocs.end()) return ZE_RESULT_ERROR_INVALID_ARGUMENT;
    if(it->second.freed) return ZE_RESULT_ERROR_MOCK_USE_AFTER_FREE;
    it->second.freed = true;
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::cmdlist_create(ze_device_handle_t hDevice, std::uint32_t ordinal,
                                        ze_command_list_handle_t* phList)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    if(!valid_device(hDevice)) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(!phList) return ZE_RESULT_ERROR_INVALID_NULL_POINTER;
    if(ordinal >= tile_count) return ZE_RESULT_ERROR_INVALID_ARGUMENT;
    const auto h = next_handle();
    m_lists.emplace(h, CommandList{ordinal, ListState::open, {}});
    *phList = from_bits<ze_command_list_handle_t>(h);
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::append_memory_copy(ze_command_list_handle_t hList, void* dst, const void* src,
                                            std::size_t size, ze_event_handle_t hSignal,
                                            std::uint32_t numWait, const ze_event_handle_t* phWait)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    auto it = m_lists.find(bits(hList));
    if(it == m_lists.end()) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(it->second.state != ListState::open) return ZE_RESULT_ERROR_MOCK_LIST_CLOSED;
    if(!dst || !src || (numWait > 0 && !phWait)) return ZE_RESULT_ERROR_INVALID_NULL_POINTER;
    for(auto addr : {bits(dst), bits(src)})
        if(const auto* a = owning_allocation(addr); a && a->freed)
            return ZE_RESULT_ERROR_MOCK_USE_AFTER_FREE;
    Command cmd;
    cmd.name  = copy_name(bits(dst), bits(src));
    cmd.bytes = size;
    if(hSignal)
    {
        auto ev = m_events.find(bits(hSignal));
        if(ev == m_events.end() || ev->second.destroyed) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
        cmd.signal = bits(hSignal);
    }
    for(std::uint32_t i = 0; i < numWait; ++i)
    {
        auto ev = m_events.find(bits(phWait[i]));
        if(ev == m_events.end() || ev->second.destroyed) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
        cmd.waits.push_back(bits(phWait[i]));
    }
    it->second.commands.push_back(std::move(cmd));
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::append_launch_kernel(ze_command_list_handle_t hList, const char* name,
                                              std::uint32_t groups, ze_event_handle_t hSignal)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    auto it = m_lists.find(bits(hList));
    if(it == m_lists.end()) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(it->second.state != ListState::open) return ZE_RESULT_ERROR_MOCK_LIST_CLOSED;
    if(!name) return ZE_RESULT_ERROR_INVALID_NULL_POINTER;
    if(groups == 0) return ZE_RESULT_ERROR_INVALID_ARGUMENT;
    Command cmd;
    cmd.kernel = true;
    cmd.name   = name;
    cmd.groups = groups;
    if(hSignal)
    {
        auto ev = m_events.find(bits(hSignal));
        if(ev == m_events.end() || ev->second.destroyed) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
        cmd.signal = bits(hSignal);
    }
    it->second.commands.push_back(std::move(cmd));
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::cmdlist_close(ze_command_list_handle_t hList)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    auto it = m_lists.find(bits(hList));
    if(it == m_lists.end()) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(it->second.state != ListState::open) return ZE_RESULT_ERROR_MOCK_LIST_CLOSED;
    it->second.state = ListState::closed;
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::cmdlist_execute(ze_command_list_handle_t hList,
                                         std::vector<codegen::ProfilingRecord>* records)
{
    std::lock_guard lk(m_mutex);
    const auto      submit = tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    auto it = m_lists.find(bits(hList));
    if(it == m_lists.end()) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    auto& list = it->second;
    if(list.state == ListState::open) return ZE_RESULT_ERROR_MOCK_LIST_NOT_CLOSED;
    if(list.state == ListState::executed) return ZE_RESULT_ERROR_MOCK_LIST_NOT_RESET;

    std::uint64_t prev_end = submit;
    for(const auto& cmd : list.commands)
    {
        const auto engine = cmd.kernel ? Engine::compute : Engine::copy;
        auto&      free_at = m_engine_free[list.tile][static_cast<unsigned>(engine)];
        std::uint64_t start = std::max(prev_end, free_at);
        for(auto w : cmd.waits)
            if(const auto& ev = m_events.at(w); ev.signal_at) start = std::max(start, *ev.signal_at);
        const auto end = start + (cmd.kernel ? m_costs.kernel_ns(cmd.groups) : m_costs.memcpy_ns(cmd.bytes));
        free_at        = end;
        prev_end       = end;
        if(cmd.signal)
            if(auto& ev = m_events.at(cmd.signal); !ev.destroyed) ev.signal_at = end;
        m_history.push_back(EngineBusy{list.tile, engine, start, end});
        if(records)
            records->push_back(codegen::ProfilingRecord{start, end, cmd.kernel ? "kernel" : "memcpy",
                                                        cmd.name, 0, list.tile, cmd.bytes, cmd.groups});
    }
    list.state = ListState::executed;
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::cmdlist_reset(ze_command_list_handle_t hList)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    auto it = m_lists.find(bits(hList));
    if(it == m_lists.end()) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    it->second.state = ListState::open;
    it->second.commands.clear();
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::event_create(ze_device_handle_t hDevice, ze_event_handle_t* phEvent)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    if(!valid_device(hDevice)) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(!phEvent) return ZE_RESULT_ERROR_INVALID_NULL_POINTER;
    const auto h = next_handle();
    m_events.emplace(h, Event{});
    *phEvent = from_bits<ze_event_handle_t>(h);
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::event_destroy(ze_event_handle_t hEvent)
{
    std::lock_guard lk(m_mutex);
    tick(m_costs.host_call_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    auto it = m_events.find(bits(hEvent));
    if(it == m_events.end()) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(it->second.destroyed) return ZE_RESULT_ERROR_MOCK_USE_AFTER_FREE;
    it->second.destroyed = true;
    return ZE_RESULT_SUCCESS;
}

ze_result_t MockRuntime::event_host_synchronize(ze_event_handle_t hEvent, std::uint64_t timeout)
{
    std::lock_guard lk(m_mutex);
    const auto      now = tick(m_costs.sync_poll_ns);
    if(!m_initialized) return ZE_RESULT_ERROR_UNINITIALIZED;
    auto it = m_events.find(bits(hEvent));
    if(it == m_events.end()) return ZE_RESULT_ERROR_INVALID_NULL_HANDLE;
    if(it->second.destroyed) return ZE_RESULT_ERROR_MOCK_USE_AFTER_FREE;
    if(!it->second.signal_at) return ZE_RESULT_ERROR_MOCK_EVENT_NOT_PENDING;
    const auto at = *it->second.signal_at;
    if(now >= at) return ZE_RESULT_SUCCESS;
    if(timeout == 0) return ZE_RESULT_NOT_READY;
    const auto limit = timeout > UINT64_MAX - now ? UINT64_MAX : now + timeout;
    m_clock.advance_to(std::min(at, limit));
    return m_clock.now_ns() >= at ? ZE_RESULT_SUCCESS : ZE_RESULT_NOT_READY;
}

bool MockRuntime::busy(unsigned tile, Engine engine, std::uint64_t t) const
{
    std::lock_guard lk(m_mutex);
    return std::any_of(m_history.begin(), m_history.end(), [&](const EngineBusy& b) {
        return b.tile == tile && b.engine == engine && b.start_ns <= t && t < b.end_ns;
    });
}

std::vector<EngineBusy> MockRuntime::busy_history() const
{
    std::lock_guard lk(m_mutex);
    return m_history;
}
}  // namespace hapi::mock
