#pragma once

#include "hapi/error.hpp"
#include "hapi/schema/schema.hpp"
#include "hapi/trace/clock.hpp"
#include "hapi/trace/event.hpp"

#include <atomic>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hapi::trace
{
struct StreamId
{
    std::string   hostname;
    std::uint64_t pid = 0;
    std::uint64_t tid = 0;

    auto operator<=>(const StreamId&) const = default;
};

std::string stream_file_name(const StreamId& id);

struct StreamInfo
{
    StreamId      id;
    std::string   file;
    std::uint64_t event_count   = 0;
    std::uint64_t dropped_count = 0;

    bool operator==(const StreamInfo&) const = default;
};

enum class EmitResult : std::uint8_t
{
    written,
    filtered,
    dropped,
};

enum class DrainMode : std::uint8_t
{
    background,  // one drainer thread polls every stream
    manual,      // only explicit drain() calls move data (tests)
};

inline constexpr std::size_t default_buffer_capacity = std::size_t{1} << 16;

/// `HAPITRACE_BUFFER_CAP` if set and valid, else `fallback`.
std::size_t buffer_capacity_from_env(std::size_t fallback = default_buffer_capacity);

struct WriterOptions
{
    schema::TracingMode mode     = schema::TracingMode::standard;
    std::size_t         capacity = default_buffer_capacity;  // events per stream
    DrainMode           drain    = DrainMode::background;
    std::string         hostname;  // empty: gethostname()
    std::uint64_t       pid = 0;   // 0: getpid()
};

/// Raised by emits that race or follow finalize().
class WriterClosed : public TraceError
{
public:
    WriterClosed() : TraceError("trace writer is closed") {}
};

class TraceWriter;

/// One (pid, tid) stream: a single-producer ring buffer drained to
/// `stream_<pid>_<tid>.bin`. Only one thread may emit on a stream.
class ThreadStream
{
public:
    ThreadStream(const ThreadStream&)            = delete;
    ThreadStream& operator=(const ThreadStream&) = delete;
    ~ThreadStream();

    /// Never blocks. Unknown schema id or payload mismatch throws and
    /// writes nothing.
    EmitResult emit(std::uint32_t schema_id, std::uint64_t timestamp_ns,
                    std::span<const FieldValue> payload);
    /// Same as above with the writer's clock reading as timestamp.
    EmitResult emit(std::uint32_t schema_id, std::span<const FieldValue> payload);
    /// Pre-encoded payload bytes (C binding path). Validated by decoding.
    EmitResult emit_encoded(std::uint32_t schema_id, std::uint64_t timestamp_ns,
                            std::span<const std::uint8_t> payload);

    /// True if the writer's mode keeps events of this schema.
    bool enabled(std::uint32_t schema_id) const;

    const StreamId& id() const noexcept { return m_id; }
    std::uint64_t   event_count() const noexcept;
    std::uint64_t   dropped_count() const noexcept;
    const TraceWriter& writer() const noexcept { return m_writer; }

private:
    friend class TraceWriter;
    ThreadStream(TraceWriter& writer, StreamId id, std::size_t capacity);

    template <typename Fill>
    EmitResult publish(Fill&& fill);
    /// Moves pending slots to the file. Drainer side only.
    void drain_to_file();
    void close_file();

    struct Slot
    {
        std::vector<std::uint8_t> bytes;
    };

    TraceWriter&              m_writer;
    StreamId                  m_id;
    std::string               m_path;
    std::vector<Slot>         m_slots;
    alignas(64) std::atomic<std::uint64_t> m_head{0};  // producer
    alignas(64) std::atomic<std::uint64_t> m_tail{0};  // drainer
    alignas(64) std::atomic<std::uint64_t> m_dropped{0};
    std::FILE*                m_file = nullptr;
};

/// A trace directory being recorded. Create with open(); finalize() once.
class TraceWriter
{
public:
    static std::unique_ptr<TraceWriter> open(const std::filesystem::path& dir,
                                             schema::SchemaRegistry registry,
                                             const ClockSource& clock, WriterOptions options = {});

    TraceWriter(const TraceWriter&)            = delete;
    TraceWriter& operator=(const TraceWriter&) = delete;
    ~TraceWriter();

    /// The calling thread's stream (tid = OS thread id), created on first use.
    ThreadStream& thread_stream();
    /// A stream with explicit identity (virtual threads, samplers).
    ThreadStream& stream(std::uint64_t pid, std::uint64_t tid);

    /// One synchronous drain pass over every stream.
    void drain();
    /// Stops the drainer, flushes everything and writes the stream index.
    /// Requires that no thread is emitting. Idempotent.
    std::vector<StreamInfo> finalize();

    bool closed() const noexcept { return m_closed.load(std::memory_order_acquire); }
    const schema::SchemaRegistry& registry() const noexcept { return m_registry; }
    const ClockSource&            clock() const noexcept { return m_clock; }
    const WriterOptions&          options() const noexcept { return m_options; }
    const std::filesystem::path&  dir() const noexcept { return m_dir; }
    bool                          enabled(std::uint32_t schema_id) const noexcept
    {
        return schema_id < m_enabled.size() && m_enabled[schema_id];
    }

private:
    friend class ThreadStream;
    TraceWriter(std::filesystem::path dir, schema::SchemaRegistry registry,
                const ClockSource& clock, WriterOptions options);

    void write_metadata(bool complete, const std::vector<StreamInfo>& streams);
    void drainer_loop(const std::atomic<bool>& stop);

    struct Impl;
    std::filesystem::path  m_dir;
    schema::SchemaRegistry m_registry;
    const ClockSource&     m_clock;
    WriterOptions          m_options;
    std::vector<bool>      m_enabled;
    std::atomic<bool>      m_closed{false};
    std::string            m_created_at;
    std::unique_ptr<Impl>  m_impl;
};
}  // namespace hapi::trace
