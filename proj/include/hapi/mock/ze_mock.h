/* Mock Level-Zero-like runtime: the traced API surface.
 *
 * Plain C99. This header is parsed by the model loader, so declarations stay
 * inside its restricted grammar: handle typedefs, enums, flat structs with a
 * leading pNext, and prototypes. C++ callers wrap the include in extern "C". */
#ifndef HAPI_ZE_MOCK_H
#define HAPI_ZE_MOCK_H

#include <stddef.h>
#include <stdint.h>

typedef struct _ze_device_handle_t* ze_device_handle_t;
typedef struct _ze_command_list_handle_t* ze_command_list_handle_t;
typedef struct _ze_event_handle_t* ze_event_handle_t;

typedef enum _ze_result_t {
    ZE_RESULT_SUCCESS = 0,
    ZE_RESULT_NOT_READY = 1,
    ZE_RESULT_ERROR_UNINITIALIZED = 0x78000001,
    ZE_RESULT_ERROR_INVALID_ARGUMENT = 0x78000004,
    ZE_RESULT_ERROR_INVALID_NULL_HANDLE = 0x78000005,
    ZE_RESULT_ERROR_INVALID_NULL_POINTER = 0x78000007,
    ZE_RESULT_ERROR_OUT_OF_HOST_MEMORY = 0x70000002,
    ZE_RESULT_ERROR_MOCK_USE_AFTER_FREE = 0x7ff00001,
    ZE_RESULT_ERROR_MOCK_LIST_CLOSED = 0x7ff00002,
    ZE_RESULT_ERROR_MOCK_LIST_NOT_CLOSED = 0x7ff00003,
    ZE_RESULT_ERROR_MOCK_LIST_NOT_RESET = 0x7ff00004,
    ZE_RESULT_ERROR_MOCK_EVENT_NOT_PENDING = 0x7ff00005
} ze_result_t;

typedef enum _ze_mem_space_t {
    ZE_MEM_SPACE_HOST = 0,
    ZE_MEM_SPACE_DEVICE = 1
} ze_mem_space_t;

/* pNext must be NULL: the mock knows no extensions. */
typedef struct _ze_device_properties_t {
    void* pNext;
    uint32_t vendorId;
    uint32_t deviceId;
    uint32_t numTiles;
    uint32_t coreClockRate;
    uint64_t maxMemAllocSize;
} ze_device_properties_t;

ze_result_t zeMockInit(uint32_t flags, ze_device_handle_t* phDevice);
ze_result_t zeMockDeviceGetProperties(ze_device_handle_t hDevice,
                                      ze_device_properties_t* pDeviceProperties);
ze_result_t zeMockMemAlloc(ze_device_handle_t hDevice, ze_mem_space_t space, size_t size,
                           void** pptr);
ze_result_t zeMockMemFree(void* ptr);
ze_result_t zeMockCommandListCreate(ze_device_handle_t hDevice, uint32_t ordinal,
                                    ze_command_list_handle_t* phCommandList);
ze_result_t zeMockCommandListAppendMemoryCopy(ze_command_list_handle_t hCommandList,
                                              void* dstptr, const void* srcptr, size_t size,
                                              ze_event_handle_t hSignalEvent,
                                              uint32_t numWaitEvents,
                                              ze_event_handle_t* phWaitEvents);
ze_result_t zeMockCommandListAppendLaunchKernel(ze_command_list_handle_t hCommandList,
                                                const char* kernelName, uint32_t groupCount,
                                                ze_event_handle_t hSignalEvent);
ze_result_t zeMockCommandListClose(ze_command_list_handle_t hCommandList);
ze_result_t zeMockCommandListExecute(ze_command_list_handle_t hCommandList);
ze_result_t zeMockCommandListReset(ze_command_list_handle_t hCommandList);
ze_result_t zeMockEventCreate(ze_device_handle_t hDevice, ze_event_handle_t* phEvent);
ze_result_t zeMockEventDestroy(ze_event_handle_t hEvent);
ze_result_t zeMockEventHostSynchronize(ze_event_handle_t hEvent, uint64_t timeout);

#endif /* HAPI_ZE_MOCK_H */
