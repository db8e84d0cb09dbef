#include "hapi/trace/writer.hpp"

#include "hapi/trace/metadata.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <sys/syscall.h>
#include <unistd.h>

namespace hapi::trace
{
namespace
{
std::atomic<std::uint64_t> g_writer_generation{1};

std::uint64_t os_thread_id() { return static_cast<std::uint64_t>(::syscall(SYS_gettid)); }

std::string local_hostname()
{
    char buf[256] = {};
    if(::gethostname(buf, sizeof buf - 1) != 0) return "localhost";
    return buf;
}

std::string utc_now()
{
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

std::vector<std::uint8_t> stream_header()
{
    std::vector<std::uint8_t> h;
    put_u32(h, trace_magic);
    put_u32(h, trace_format_version);
    put_u64(h, 0);
    return h;
}

constexpr auto drainer_period = std::chrono::microseconds(250);
}  // namespace

std::uint64_t MonotonicClock::now_ns() const
{
    timespec ts{};
    ::clock_gettime(CLOCK_MONOTONIC, &ts);
    return static_cast<std::uint64_t>(ts.tv_sec) * 1'000'000'000ULL +
           static_cast<std::uint64_t>(ts.tv_nsec);
}

std::string stream_file_name(const StreamId& id)
{
    return fmt::format("stream_{}_{}.bin", id.pid, id.tid);
}

std::size_t buffer_capacity_from_env(std::size_t fallback)
{
    const char* env = std::getenv("HAPITRACE_BUFFER_CAP");
    if(!env || !*env) return fallback;
    char*      end = nullptr;
    const auto v   = std::strtoull(env, &end, 10);
    if(*end != '\0' || v == 0) return fallback;
    return static_cast<std::size_t>(v);
}

// --- ThreadStream -----------------------------------------------------------

ThreadStream::ThreadStream(TraceWriter& writer, StreamId id, std::size_t capacity)
: m_writer(writer)
, m_id(std::move(id))
, m_path((writer.dir() / stream_file_name(m_id)).string())
, m_slots(capacity)
{
    m_file = std::fopen(m_path.c_str(), "wb");
    if(!m_file) throw TraceError(fmt::format("cannot create stream file {}", m_path));
    const auto header = stream_header();
    if(std::fwrite(header.data(), 1, header.size(), m_file) != header.size())
        throw TraceError(fmt::format("cannot write stream header to {}", m_path));
}

ThreadStream::~ThreadStream() { close_file(); }

void ThreadStream::close_file()
{
    if(m_file)
    {
        std::fclose(m_file);
        m_file = nullptr;
    }
}

std::uint64_t ThreadStream::event_count() const noexcept
{
    return m_head.load(std::memory_order_acquire);
}

std::uint64_t ThreadStream::dropped_count() const noexcept
{
    return m_dropped.load(std::memory_order_acquire);
}

bool ThreadStream::enabled(std::uint32_t schema_id) const { return m_writer.enabled(schema_id); }

template <typename Fill>
EmitResult ThreadStream::publish(Fill&& fill)
{
    if(m_writer.closed()) throw WriterClosed();
    const auto head = m_head.load(std::memory_order_relaxed);
    const auto tail = m_tail.load(std::memory_order_acquire);
    if(head - tail >= m_slots.size())
    {
        m_dropped.fetch_add(1, std::memory_order_acq_rel);
        return EmitResult::dropped;
    }
    auto& slot = m_slots[head % m_slots.size()];
    slot.bytes.clear();
    fill(slot.bytes);
    m_head.store(head + 1, std::memory_order_release);
    return EmitResult::written;
}

EmitResult ThreadStream::emit(std::uint32_t schema_id, std::uint64_t timestamp_ns,
                              std::span<const FieldValue> payload)
{
    const auto* schema = m_writer.registry().at(schema_id);
    if(!schema) throw TraceError(fmt::format("emit: unknown schema id {}", schema_id));
    if(!m_writer.enabled(schema_id))
    {
        if(m_writer.closed()) throw WriterClosed();
        return EmitResult::filtered;
    }
    check_payload(*schema, payload);
    return publish([&](std::vector<std::uint8_t>& out) {
        put_u32(out, schema_id);
        put_u64(out, timestamp_ns);
        put_u32(out, 0);
        encode_payload(*schema, payload, out);
        const auto len = static_cast<std::uint32_t>(out.size() - record_header_size);
        for(int i = 0; i < 4; ++i) out[12 + i] = static_cast<std::uint8_t>(len >> (8 * i));
    });
}

EmitResult ThreadStream::emit(std::uint32_t schema_id, std::span<const FieldValue> payload)
{
    return emit(schema_id, m_writer.clock().now_ns(), payload);
}

EmitResult ThreadStream::emit_encoded(std::uint32_t schema_id, std::uint64_t timestamp_ns,
                                      std::span<const std::uint8_t> payload)
{
    const auto* schema = m_writer.registry().at(schema_id);
    if(!schema) throw TraceError(fmt::format("emit: unknown schema id {}", schema_id));
    if(!m_writer.enabled(schema_id))
    {
        if(m_writer.closed()) throw WriterClosed();
        return EmitResult::filtered;
    }
    if(payload.size() > UINT32_MAX) throw TraceError("emit: payload exceeds 4 GiB");
    (void)decode_payload(*schema, payload, m_id.hostname);
    return publish([&](std::vector<std::uint8_t>& out) {
        put_u32(out, schema_id);
        put_u64(out, timestamp_ns);
        put_u32(out, static_cast<std::uint32_t>(payload.size()));
        out.insert(out.end(), payload.begin(), payload.end());
    });
}

void ThreadStream::drain_to_file()
{
    auto       tail = m_tail.load(std::memory_order_relaxed);
    const auto head = m_head.load(std::memory_order_acquire);
    if(tail == head || !m_file) return;
    for(; tail != head; ++tail)
    {
        const auto& bytes = m_slots[tail % m_slots.size()].bytes;
        if(std::fwrite(bytes.data(), 1, bytes.size(), m_file) != bytes.size())
            throw TraceError(m_path, 0, "short write while draining stream");
        m_tail.store(tail + 1, std::memory_order_release);
    }
}

// --- TraceWriter ------------------------------------------------------------

struct TraceWriter::Impl
{
    std::mutex                                                  mutex;
    std::vector<std::unique_ptr<ThreadStream>>                  streams;
    std::map<std::pair<std::uint64_t, std::uint64_t>, ThreadStream*> by_id;
    std::mutex                                                  drain_mutex;
    std::jthread                                                drainer;
    std::uint64_t                                               generation = 0;
    std::vector<StreamInfo>                                     final_streams;
    bool                                                        finalized  = false;
    bool                                                        io_failed  = false;
};

TraceWriter::TraceWriter(std::filesystem::path dir, schema::SchemaRegistry registry,
                         const ClockSource& clock, WriterOptions options)
: m_dir(std::move(dir))
, m_registry(std::move(registry))
, m_clock(clock)
, m_options(std::move(options))
, m_created_at(utc_now())
, m_impl(std::make_unique<Impl>())
{
    if(m_options.hostname.empty()) m_options.hostname = local_hostname();
    if(m_options.pid == 0) m_options.pid = static_cast<std::uint64_t>(::getpid());
    if(m_options.capacity == 0) throw TraceError("buffer capacity must be positive");
    m_enabled.reserve(m_registry.schemas.size());
    for(const auto& s : m_registry.schemas) m_enabled.push_back(s.modes.has(m_options.mode));
    m_impl->generation = g_writer_generation.fetch_add(1);
}

std::unique_ptr<TraceWriter> TraceWriter::open(const std::filesystem::path& dir,
                                               schema::SchemaRegistry registry,
                                               const ClockSource& clock, WriterOptions options)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if(fs::exists(dir, ec))
    {
        if(!fs::is_directory(dir, ec))
            throw TraceError(fmt::format("{}: exists and is not a directory", dir.string()));
        if(!fs::is_empty(dir, ec))
            throw TraceError(fmt::format("{}: directory exists and is not empty", dir.string()));
    }
    else if(!fs::create_directories(dir, ec) || ec)
        throw TraceError(fmt::format("{}: cannot create directory: {}", dir.string(), ec.message()));

    std::unique_ptr<TraceWriter> w(
        new TraceWriter(dir, std::move(registry), clock, std::move(options)));
    w->write_metadata(false, {});
    if(w->m_options.drain == DrainMode::background)
    {
        auto* self         = w.get();
        w->m_impl->drainer = std::jthread([self](std::stop_token st) {
            std::atomic<bool> stop{false};
            std::stop_callback cb(st, [&] { stop.store(true); });
            self->drainer_loop(stop);
        });
    }
    return w;
}

TraceWriter::~TraceWriter()
{
    try
    {
        finalize();
    } catch(...)
    {
    }
}

void TraceWriter::drainer_loop(const std::atomic<bool>& stop)
{
    while(!stop.load())
    {
        try
        {
            drain();
        } catch(const TraceError&)
        {
            std::lock_guard lk(m_impl->mutex);
            m_impl->io_failed = true;
            return;
        }
        std::this_thread::sleep_for(drainer_period);
    }
}

ThreadStream& TraceWriter::stream(std::uint64_t pid, std::uint64_t tid)
{
    std::lock_guard lk(m_impl->mutex);
    if(closed()) throw WriterClosed();
    auto key = std::make_pair(pid, tid);
    if(auto it = m_impl->by_id.find(key); it != m_impl->by_id.end()) return *it->second;
    std::unique_ptr<ThreadStream> s(
        new ThreadStream(*this, StreamId{m_options.hostname, pid, tid}, m_options.capacity));
    auto* raw = s.get();
    m_impl->streams.push_back(std::move(s));
    m_impl->by_id.emplace(key, raw);
    return *raw;
}

ThreadStream& TraceWriter::thread_stream()
{
    struct Cache
    {
        std::uint64_t generation = 0;
        ThreadStream* stream     = nullptr;
    };
    thread_local Cache cache;
    if(cache.generation == m_impl->generation && cache.stream) return *cache.stream;
    auto& s          = stream(m_options.pid, os_thread_id());
    cache.generation = m_impl->generation;
    cache.stream     = &s;
    return s;
}

void TraceWriter::drain()
{
    std::vector<ThreadStream*> snapshot;
    {
        std::lock_guard lk(m_impl->mutex);
        snapshot.reserve(m_impl->streams.size());
        for(auto& s : m_impl->streams) snapshot.push_back(s.get());
    }
    std::lock_guard dl(m_impl->drain_mutex);
    for(auto* s : snapshot) s->drain_to_file();
}

std::vector<StreamInfo> TraceWriter::finalize()
{
    if(m_impl->finalized) return m_impl->final_streams;
    m_closed.store(true, std::memory_order_release);
    if(m_impl->drainer.joinable())
    {
        m_impl->drainer.request_stop();
        m_impl->drainer.join();
    }

    bool failed = m_impl->io_failed;
    try
    {
        drain();
    } catch(const TraceError&)
    {
        failed = true;
    }

    std::vector<StreamInfo> infos;
    {
        std::lock_guard lk(m_impl->mutex);
        for(auto& s : m_impl->streams)
        {
            if(s->m_file && std::fclose(s->m_file) != 0) failed = true;
            s->m_file = nullptr;
            infos.push_back(StreamInfo{s->id(), stream_file_name(s->id()), s->event_count(),
                                       s->dropped_count()});
        }
    }
    std::sort(infos.begin(), infos.end(),
              [](const StreamInfo& a, const StreamInfo& b) { return a.id < b.id; });
    m_impl->finalized     = true;
    m_impl->final_streams = infos;
    write_metadata(!failed, infos);
    if(failed) throw TraceError(fmt::format("{}: I/O failure, trace marked incomplete", m_dir.string()));
    return infos;
}

void TraceWriter::write_metadata(bool complete, const std::vector<StreamInfo>& streams)
{
    TraceMetadata meta;
    meta.mode            = m_options.mode;
    meta.clock           = std::string(m_clock.kind());
    meta.hostname        = m_options.hostname;
    meta.pid             = m_options.pid;
    meta.buffer_capacity = m_options.capacity;
    meta.created_at      = m_created_at;
    meta.complete        = complete;
    meta.registry        = m_registry;
    meta.streams         = streams;

    const auto    path = m_dir / metadata_file_name;
    std::ofstream out(path, std::ios::trunc);
    out << metadata_to_json(meta);
    if(!out) throw TraceError(fmt::format("{}: cannot write metadata", path.string()));
}
}  // namespace hapi::trace
