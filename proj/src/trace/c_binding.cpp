#include "hapi/trace/hapi_writer.h"

#include "hapi/trace/writer.hpp"

#include <memory>

struct hapi_writer
{
    hapi::trace::MonotonicClock                clock;
    std::unique_ptr<hapi::trace::TraceWriter> writer;
};

namespace
{
hapi::trace::ThreadStream* as_stream(hapi_stream* s)
{
    return reinterpret_cast<hapi::trace::ThreadStream*>(s);
}
}  // namespace

extern "C" {

hapi_writer* hapi_writer_open(const char* dir, const char* registry_json, const char* mode)
{
    if(!dir || !registry_json || !mode) return nullptr;
    try
    {
        auto m = hapi::schema::tracing_mode_from_string(mode);
        if(!m) return nullptr;
        auto handle = std::make_unique<hapi_writer>();
        hapi::trace::WriterOptions opts;
        opts.mode     = *m;
        opts.capacity = hapi::trace::buffer_capacity_from_env();
        handle->writer = hapi::trace::TraceWriter::open(
            dir, hapi::schema::registry_from_json(registry_json), handle->clock, opts);
        return handle.release();
    } catch(...)
    {
        return nullptr;
    }
}

hapi_stream* hapi_writer_acquire_stream(hapi_writer* writer)
{
    if(!writer || !writer->writer || writer->writer->closed()) return nullptr;
    try
    {
        return reinterpret_cast<hapi_stream*>(&writer->writer->thread_stream());
    } catch(...)
    {
        return nullptr;
    }
}

int hapi_writer_emit(hapi_stream* stream, uint32_t schema_id, uint64_t timestamp_ns,
                     const void* payload, uint32_t payload_len)
{
    if(!stream || (!payload && payload_len != 0)) return HAPI_EMIT_ERROR;
    try
    {
        const auto* bytes = static_cast<const std::uint8_t*>(payload);
        switch(as_stream(stream)->emit_encoded(schema_id, timestamp_ns, {bytes, payload_len}))
        {
            case hapi::trace::EmitResult::written: return HAPI_EMIT_WRITTEN;
            case hapi::trace::EmitResult::filtered: return HAPI_EMIT_FILTERED;
            case hapi::trace::EmitResult::dropped: return HAPI_EMIT_DROPPED;
        }
    } catch(...)
    {
    }
    return HAPI_EMIT_ERROR;
}

uint64_t hapi_writer_clock_ns(const hapi_writer* writer)
{
    return writer ? writer->clock.now_ns() : hapi::trace::MonotonicClock{}.now_ns();
}

int hapi_writer_close(hapi_writer* writer)
{
    if(!writer) return -1;
    std::unique_ptr<hapi_writer> owned(writer);
    try
    {
        owned->writer->finalize();
        return 0;
    } catch(...)
    {
        return -1;
    }
}
}
