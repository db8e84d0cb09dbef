#include "hapi/trace/reader.hpp"

#include "hapi/error.hpp"

#include <fmt/format.h>

#include <utility>

namespace hapi::trace
{
StreamCursor::StreamCursor(const std::filesystem::path& file,
                           const schema::SchemaRegistry& registry, StreamInfo info)
: m_registry(&registry)
, m_info(std::move(info))
, m_name(file.filename().string())
{
    m_file = std::fopen(file.c_str(), "rb");
    if(!m_file) throw TraceError(m_name, 0, "cannot open stream file");
    std::uint8_t header[stream_header_size];
    if(!read_exact(header, sizeof header)) throw TraceError(m_name, 0, "truncated stream header");
    if(get_u32(header) != trace_magic) throw TraceError(m_name, 0, "bad stream magic");
    if(get_u32(header + 4) != trace_format_version)
        throw TraceError(m_name, 4, fmt::format("unsupported stream version {}", get_u32(header + 4)));
    m_offset = stream_header_size;
}

StreamCursor::StreamCursor(StreamCursor&& o) noexcept
: m_registry(o.m_registry)
, m_info(std::move(o.m_info))
, m_name(std::move(o.m_name))
, m_file(std::exchange(o.m_file, nullptr))
, m_offset(o.m_offset)
, m_buf(std::move(o.m_buf))
{
}

StreamCursor& StreamCursor::operator=(StreamCursor&& o) noexcept
{
    if(this != &o)
    {
        if(m_file) std::fclose(m_file);
        m_registry = o.m_registry;
        m_info     = std::move(o.m_info);
        m_name     = std::move(o.m_name);
        m_file     = std::exchange(o.m_file, nullptr);
        m_offset   = o.m_offset;
        m_buf      = std::move(o.m_buf);
    }
    return *this;
}

StreamCursor::~StreamCursor()
{
    if(m_file) std::fclose(m_file);
}

bool StreamCursor::read_exact(std::uint8_t* dst, std::size_t n)
{
    return std::fread(dst, 1, n, m_file) == n;
}

std::optional<EventRecord> StreamCursor::next()
{
    if(!m_file) return std::nullopt;
    m_buf.resize(record_header_size);
    const auto got = std::fread(m_buf.data(), 1, record_header_size, m_file);
    if(got == 0) return std::nullopt;
    if(got != record_header_size) throw TraceError(m_name, m_offset, "truncated record header");
    const std::size_t len = get_u32(m_buf.data() + 12);
    m_buf.resize(record_header_size + len);
    if(!read_exact(m_buf.data() + record_header_size, len))
        throw TraceError(m_name, m_offset,
                         fmt::format("truncated record: payload of {} bytes cut short", len));
    auto d = decode_record(*m_registry, m_buf, m_name, m_offset);
    m_offset += d.size;
    return std::move(d.record);
}

TraceReader::TraceReader(const std::filesystem::path& dir)
: m_dir(dir)
, m_meta(read_metadata(dir))
{
}

StreamCursor TraceReader::cursor(std::size_t stream_index) const
{
    const auto& info = m_meta.streams.at(stream_index);
    return StreamCursor(m_dir / info.file, m_meta.registry, info);
}

std::vector<EventRecord> TraceReader::read_all(std::size_t stream_index) const
{
    auto                     cur = cursor(stream_index);
    std::vector<EventRecord> out;
    while(auto r = cur.next()) out.push_back(std::move(*r));
    return out;
}
}  // namespace hapi::trace
