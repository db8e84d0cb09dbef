#pragma once

#include "hapi/schema/schema.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hapi::trace
{
/// An address payload. Kept distinct from plain u64 so kinds never mix.
struct Address
{
    std::uint64_t value = 0;

    auto operator<=>(const Address&) const = default;
};

using Blob = std::vector<std::uint8_t>;

/// Variant index order matches schema::FieldKind.
using FieldValue = std::variant<std::uint64_t, std::int64_t, double, Address, std::string, Blob>;

schema::FieldKind kind_of(const FieldValue& v) noexcept;

/// Equality that compares doubles by bit pattern (NaN == NaN, 0.0 != -0.0).
bool bitwise_equal(const FieldValue& a, const FieldValue& b) noexcept;

struct EventRecord
{
    std::uint32_t           schema_id    = 0;
    std::uint64_t           timestamp_ns = 0;
    std::vector<FieldValue> payload;
};

bool bitwise_equal(const EventRecord& a, const EventRecord& b) noexcept;

inline constexpr std::uint32_t trace_magic          = 0x54485049;  // "THPI"
inline constexpr std::uint32_t trace_format_version = 1;
inline constexpr std::size_t   stream_header_size   = 16;
inline constexpr std::size_t   record_header_size   = 16;  // id + ts + payload_len
/// Strings and blobs captured by generated wrappers are cut to this many bytes.
inline constexpr std::size_t   capture_byte_cap     = 4096;

/// Throws TraceError unless `payload` has the schema's arity and kinds.
void check_payload(const schema::EventSchema& schema, std::span<const FieldValue> payload);

/// Appends the payload bytes (fields in schema order). Validates first.
void encode_payload(const schema::EventSchema& schema, std::span<const FieldValue> payload,
                    std::vector<std::uint8_t>& out);

/// Appends one full record. Validates first; on error `out` is unchanged.
void encode_record(const schema::EventSchema& schema, const EventRecord& rec,
                   std::vector<std::uint8_t>& out);

/// Decodes a payload of exactly `bytes.size()` bytes. Throws TraceError with
/// `stream` and `base_offset + position` on malformed input.
std::vector<FieldValue> decode_payload(const schema::EventSchema& schema,
                                       std::span<const std::uint8_t> bytes,
                                       const std::string& stream = {},
                                       std::uint64_t base_offset = 0);

struct DecodedRecord
{
    EventRecord record;
    std::size_t size = 0;  // bytes consumed
};

/// Decodes one record at the front of `bytes`.
DecodedRecord decode_record(const schema::SchemaRegistry& registry,
                            std::span<const std::uint8_t> bytes, const std::string& stream = {},
                            std::uint64_t base_offset = 0);

// Little-endian primitives.
void          put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void          put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint32_t get_u32(const std::uint8_t* p) noexcept;
std::uint64_t get_u64(const std::uint8_t* p) noexcept;
}  // namespace hapi::trace
