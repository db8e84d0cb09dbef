#pragma once

#include "hapi/trace/event.hpp"
#include "hapi/trace/metadata.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

namespace hapi::trace
{
/// Sequential decoder over one stream file. Move-only.
class StreamCursor
{
public:
    StreamCursor(const std::filesystem::path& file, const schema::SchemaRegistry& registry,
                 StreamInfo info);
    StreamCursor(StreamCursor&&) noexcept;
    StreamCursor& operator=(StreamCursor&&) noexcept;
    ~StreamCursor();

    /// Next record, or nullopt at end of stream. Corrupt bytes throw
    /// TraceError naming the file and byte offset.
    std::optional<EventRecord> next();

    /// Byte offset of the next record.
    std::uint64_t     offset() const noexcept { return m_offset; }
    const StreamInfo& info() const noexcept { return m_info; }

private:
    bool read_exact(std::uint8_t* dst, std::size_t n);

    const schema::SchemaRegistry* m_registry = nullptr;
    StreamInfo                    m_info;
    std::string                   m_name;
    std::FILE*                    m_file   = nullptr;
    std::uint64_t                 m_offset = 0;
    std::vector<std::uint8_t>     m_buf;
};

/// A finalized trace directory. Never writes to it.
class TraceReader
{
public:
    explicit TraceReader(const std::filesystem::path& dir);

    const TraceMetadata&           metadata() const noexcept { return m_meta; }
    const schema::SchemaRegistry&  registry() const noexcept { return m_meta.registry; }
    const std::vector<StreamInfo>& streams() const noexcept { return m_meta.streams; }
    const std::filesystem::path&   dir() const noexcept { return m_dir; }

    StreamCursor cursor(std::size_t stream_index) const;
    /// Every record of one stream, in file order.
    std::vector<EventRecord> read_all(std::size_t stream_index) const;

private:
    std::filesystem::path m_dir;
    TraceMetadata         m_meta;
};
}  // namespace hapi::trace
