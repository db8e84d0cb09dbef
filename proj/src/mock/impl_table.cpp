#include "hapi/mock/runtime.hpp"

namespace hapi::mock
{
namespace
{
using codegen::ArgValue;
using codegen::CallResult;

std::uint64_t u64(const ArgValue& v)
{
    if(const auto* u = std::get_if<std::uint64_t>(&v)) return *u;
    if(const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<std::uint64_t>(*i);
    if(const auto* p = std::get_if<void*>(&v)) return reinterpret_cast<std::uintptr_t>(*p);
    return 0;
}

template <typename T>
T ptr(const ArgValue& v)
{
    if(const auto* p = std::get_if<void*>(&v)) return static_cast<T>(*p);
    if(const auto* s = std::get_if<const char*>(&v)) return reinterpret_cast<T>(const_cast<char*>(*s));
    return reinterpret_cast<T>(static_cast<std::uintptr_t>(u64(v)));
}

template <typename H>
H handle(const ArgValue& v)
{
    return reinterpret_cast<H>(static_cast<std::uintptr_t>(u64(v)));
}

CallResult done(ze_result_t r) { return CallResult{static_cast<std::int64_t>(r), {}}; }
}  // namespace

codegen::ImplTable MockRuntime::impl_table()
{
    codegen::ImplTable t;
    t["zeMockInit"] = [this](std::span<const ArgValue> a) {
        return done(init(static_cast<std::uint32_t>(u64(a[0])), ptr<ze_device_handle_t*>(a[1])));
    };
    t["zeMockDeviceGetProperties"] = [this](std::span<const ArgValue> a) {
        return done(get_device_properties(handle<ze_device_handle_t>(a[0]),
                                          ptr<ze_device_properties_t*>(a[1])));
    };
    t["zeMockMemAlloc"] = [this](std::span<const ArgValue> a) {
        return done(mem_alloc(handle<ze_device_handle_t>(a[0]), static_cast<ze_mem_space_t>(u64(a[1])),
                              static_cast<std::size_t>(u64(a[2])), ptr<void**>(a[3])));
    };
    t["zeMockMemFree"] = [this](std::span<const ArgValue> a) { return done(mem_free(ptr<void*>(a[0]))); };
    t["zeMockCommandListCreate"] = [this](std::span<const ArgValue> a) {
        return done(cmdlist_create(handle<ze_device_handle_t>(a[0]), static_cast<std::uint32_t>(u64(a[1])),
                                   ptr<ze_command_list_handle_t*>(a[2])));
    };
    t["zeMockCommandListAppendMemoryCopy"] = [this](std::span<const ArgValue> a) {
        return done(append_memory_copy(handle<ze_command_list_handle_t>(a[0]), ptr<void*>(a[1]),
                                       ptr<const void*>(a[2]), static_cast<std::size_t>(u64(a[3])),
                                       handle<ze_event_handle_t>(a[4]), static_cast<std::uint32_t>(u64(a[5])),
                                       ptr<const ze_event_handle_t*>(a[6])));
    };
    t["zeMockCommandListAppendLaunchKernel"] = [this](std::span<const ArgValue> a) {
        return done(append_launch_kernel(handle<ze_command_list_handle_t>(a[0]), ptr<const char*>(a[1]),
                                         static_cast<std::uint32_t>(u64(a[2])),
                                         handle<ze_event_handle_t>(a[3])));
    };
    t["zeMockCommandListClose"] = [this](std::span<const ArgValue> a) {
        return done(cmdlist_close(handle<ze_command_list_handle_t>(a[0])));
    };
    t["zeMockCommandListExecute"] = [this](std::span<const ArgValue> a) {
        CallResult r;
        r.value = cmdlist_execute(handle<ze_command_list_handle_t>(a[0]), &r.profiling);
        return r;
    };
    t["zeMockCommandListReset"] = [this](std::span<const ArgValue> a) {
        return done(cmdlist_reset(handle<ze_command_list_handle_t>(a[0])));
    };
    t["zeMockEventCreate"] = [this](std::span<const ArgValue> a) {
        return done(event_create(handle<ze_device_handle_t>(a[0]), ptr<ze_event_handle_t*>(a[1])));
    };
    t["zeMockEventDestroy"] = [this](std::span<const ArgValue> a) {
        return done(event_destroy(handle<ze_event_handle_t>(a[0])));
    };
    t["zeMockEventHostSynchronize"] = [this](std::span<const ArgValue> a) {
        return done(event_host_synchronize(handle<ze_event_handle_t>(a[0]), u64(a[1])));
    };
    return t;
}
}  // namespace hapi::mock
