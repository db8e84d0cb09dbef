#pragma once

extern "C" {
#include "hapi/mock/ze_mock.h"
}

#include "hapi/codegen/dispatch.hpp"
#include "hapi/trace/clock.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hapi::mock
{
/// Virtual-time costs in nanoseconds.
struct CostTable
{
    std::uint64_t host_call_ns       = 500;
    std::uint64_t sync_poll_ns       = 100;
    std::uint64_t memcpy_fixed_ns    = 2000;
    std::uint64_t memcpy_ns_per_byte = 1;
    std::uint64_t kernel_ns_per_group = 1000;

    std::uint64_t memcpy_ns(std::uint64_t bytes) const { return memcpy_fixed_ns + memcpy_ns_per_byte * bytes; }
    std::uint64_t kernel_ns(std::uint64_t groups) const { return kernel_ns_per_group * groups; }
};

inline constexpr std::uint64_t host_address_base   = 0x00007fffe0000000ULL;
inline constexpr std::uint64_t device_address_base = 0xff007ffff0000000ULL;
inline constexpr std::uint64_t handle_base         = 0x0000000005000000ULL;
inline constexpr std::uint64_t allocation_alignment = 64;
inline constexpr unsigned      tile_count           = 2;

/// Values a property query returns when pNext is not NULL.
inline constexpr std::uint32_t poison_u32 = 0xdeadbeefu;
inline constexpr std::uint64_t poison_u64 = 0xdeadbeefdeadbeefULL;

enum class Engine : std::uint8_t
{
    compute,
    copy,
};

struct EngineBusy
{
    unsigned      tile   = 0;
    Engine        engine = Engine::compute;
    std::uint64_t start_ns = 0;
    std::uint64_t end_ns   = 0;
};

/// A Level-Zero-like device runtime on a virtual clock. Every call advances
/// the clock by its host cost; execute schedules commands on per-tile
/// engines that run one command at a time. Thread-safe.
class MockRuntime
{
public:
    explicit MockRuntime(trace::VirtualClock& clock, CostTable costs = {});

    ze_result_t init(std::uint32_t flags, ze_device_handle_t* phDevice);
    ze_result_t get_device_properties(ze_device_handle_t hDevice, ze_device_properties_t* props);
    ze_result_t mem_alloc(ze_device_handle_t hDevice, ze_mem_space_t space, std::size_t size, void** pptr);
    ze_result_t mem_free(void* ptr);
    ze_result_t cmdlist_create(ze_device_handle_t hDevice, std::uint32_t ordinal,
                               ze_command_list_handle_t* phList);
    ze_result_t append_memory_copy(ze_command_list_handle_t hList, void* dst, const void* src,
                                   std::size_t size, ze_event_handle_t hSignal,
                                   std::uint32_t numWait, const ze_event_handle_t* phWait);
    ze_result_t append_launch_kernel(ze_command_list_handle_t hList, const char* name,
                                     std::uint32_t groups, ze_event_handle_t hSignal);
    ze_result_t cmdlist_close(ze_command_list_handle_t hList);
    /// Device records of the commands it scheduled go to `records`.
    ze_result_t cmdlist_execute(ze_command_list_handle_t hList,
                                std::vector<codegen::ProfilingRecord>* records = nullptr);
    ze_result_t cmdlist_reset(ze_command_list_handle_t hList);
    ze_result_t event_create(ze_device_handle_t hDevice, ze_event_handle_t* phEvent);
    ze_result_t event_destroy(ze_event_handle_t hEvent);
    /// timeout 0 polls once; otherwise waits up to `timeout` virtual ns.
    ze_result_t event_host_synchronize(ze_event_handle_t hEvent, std::uint64_t timeout);

    /// True if a command occupies (tile, engine) at instant t (start <= t < end).
    bool busy(unsigned tile, Engine engine, std::uint64_t t) const;
    std::vector<EngineBusy> busy_history() const;

    const CostTable&     costs() const noexcept { return m_costs; }
    trace::VirtualClock&       clock() noexcept { return m_clock; }
    const trace::VirtualClock& clock() const noexcept { return m_clock; }

    /// Implementations keyed by the header's function names, for DispatchTable.
    codegen::ImplTable impl_table();

private:
    enum class ListState : std::uint8_t
    {
        open,
        closed,
        executed,
    };

    struct Command
    {
        bool                           kernel = false;
        std::string                    name;
        std::uint64_t                  bytes  = 0;
        std::uint64_t                  groups = 0;
        std::uint64_t                  signal = 0;
        std::vector<std::uint64_t>     waits;
    };

    struct CommandList
    {
        unsigned             tile  = 0;
        ListState            state = ListState::open;
        std::vector<Command> commands;
    };

    struct Event
    {
        bool                         destroyed = false;
        std::optional<std::uint64_t> signal_at;
    };

    struct Allocation
    {
        std::uint64_t  size  = 0;
        ze_mem_space_t space = ZE_MEM_SPACE_HOST;
        bool           freed = false;
    };

    std::uint64_t tick(std::uint64_t cost);
    std::uint64_t next_handle();
    bool          valid_device(ze_device_handle_t h) const;
    /// Non-null if `addr` lies inside an allocation (live or freed).
    const Allocation* owning_allocation(std::uint64_t addr) const;
    std::string       copy_name(std::uint64_t dst, std::uint64_t src) const;

    mutable std::mutex                       m_mutex;
    trace::VirtualClock&                     m_clock;
    CostTable                                m_costs;
    bool                                     m_initialized = false;
    std::uint64_t                            m_device      = 0;
    std::uint64_t                            m_handles     = 0;
    std::uint64_t                            m_host_next   = host_address_base;
    std::uint64_t                            m_device_next = device_address_base;
    std::map<std::uint64_t, Allocation>      m_allocs;
    std::map<std::uint64_t, CommandList>     m_lists;
    std::map<std::uint64_t, Event>           m_events;
    std::uint64_t                            m_engine_free[tile_count][2] = {};
    std::vector<EngineBusy>                  m_history;
};
}  // namespace hapi::mock
