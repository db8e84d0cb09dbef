/* C binding to the trace writer, used by generated interposers.
 *
 * The five entry points and their signatures are frozen. All functions are
 * safe to call from any thread; a stream returned by
 * hapi_writer_acquire_stream belongs to the calling thread only. */
#ifndef HAPI_WRITER_H
#define HAPI_WRITER_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct hapi_writer hapi_writer;
typedef struct hapi_stream hapi_stream;

#define HAPI_EMIT_WRITTEN 0
#define HAPI_EMIT_FILTERED 1
#define HAPI_EMIT_DROPPED 2
#define HAPI_EMIT_ERROR (-1)

/* Creates the trace directory `dir` (must be absent or empty). `registry_json`
 * is the registry document embedded by the generator; `mode` is "minimal",
 * "default" or "full". Returns NULL on failure. */
hapi_writer* hapi_writer_open(const char* dir, const char* registry_json, const char* mode);

/* The calling thread's stream, created on first use. NULL once closed. */
hapi_stream* hapi_writer_acquire_stream(hapi_writer* writer);

/* Appends one record. `payload` holds the fields in schema order, encoded
 * little-endian. Never blocks. Returns one of the HAPI_EMIT_* codes. */
int hapi_writer_emit(hapi_stream* stream, uint32_t schema_id, uint64_t timestamp_ns,
                     const void* payload, uint32_t payload_len);

/* CLOCK_MONOTONIC in nanoseconds. */
uint64_t hapi_writer_clock_ns(const hapi_writer* writer);

/* Flushes, writes the stream index and frees the writer. 0 on success. */
int hapi_writer_close(hapi_writer* writer);

#ifdef __cplusplus
}
#endif

#endif /* HAPI_WRITER_H */
