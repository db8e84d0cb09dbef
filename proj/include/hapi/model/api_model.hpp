#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hapi::model
{
enum class Direction : std::uint8_t
{
    in,
    out,
    inout,
    unknown,
};

enum class DerefKind : std::uint8_t
{
    scalar,  // one value of the pointee type (structs are flattened)
    array,   // length taken from another parameter
    blob,    // fixed byte count
};

/// What lives behind an address-valued parameter.
struct DerefSpec
{
    DerefKind     kind = DerefKind::scalar;
    std::string   length_param  = {};     // array only
    bool          element_count = false;  // array only: length counts elements, not bytes
    std::uint64_t blob_size     = 0;      // blob only, in bytes

    bool operator==(const DerefSpec&) const = default;
};

struct ParamDecl
{
    std::string              name;
    std::string              c_type;
    Direction                direction = Direction::unknown;
    std::optional<DerefSpec> deref     = {};
    bool                     is_handle = false;

    bool operator==(const ParamDecl&) const = default;
};

enum class FunctionAttr : std::uint8_t
{
    minimal_included = 0,
    default_excluded,
    profiled,
    releases_handle,
    creates_handle,
};

class FunctionAttrs
{
public:
    FunctionAttrs() = default;

    bool has(FunctionAttr a) const noexcept { return (m_bits & bit(a)) != 0; }
    void set(FunctionAttr a) noexcept { m_bits |= bit(a); }
    void merge(FunctionAttrs other) noexcept { m_bits |= other.m_bits; }
    bool empty() const noexcept { return m_bits == 0; }

    bool operator==(const FunctionAttrs&) const = default;

private:
    static constexpr std::uint8_t bit(FunctionAttr a) { return std::uint8_t(1u << unsigned(a)); }

    std::uint8_t m_bits = 0;
};

inline constexpr FunctionAttr all_function_attrs[] = {
    FunctionAttr::minimal_included, FunctionAttr::default_excluded, FunctionAttr::profiled,
    FunctionAttr::releases_handle,  FunctionAttr::creates_handle,
};

struct FunctionDecl
{
    std::string            name;
    std::string            return_type;
    std::vector<ParamDecl> params;
    FunctionAttrs          attrs;

    const ParamDecl* find_param(std::string_view pname) const;
    bool             operator==(const FunctionDecl&) const = default;
};

enum class ScalarKind : std::uint8_t
{
    u64,
    i64,
    f64,
    address,
};

struct StructField
{
    std::string   name;
    ScalarKind    kind  = ScalarKind::u64;
    std::uint32_t width = 8;  // bytes: 1, 2, 4 or 8

    bool operator==(const StructField&) const = default;
};

struct StructDef
{
    std::string              name;
    std::vector<StructField> fields;

    bool operator==(const StructDef&) const = default;
};

struct EnumConstant
{
    std::string  name;
    std::int64_t value = 0;

    bool operator==(const EnumConstant&) const = default;
};

struct EnumDef
{
    std::string               name;
    std::vector<EnumConstant> constants;

    bool operator==(const EnumDef&) const = default;
};

struct ApiModel
{
    std::string               api_name;
    std::string               version;
    std::vector<std::string>  handles;
    std::vector<EnumDef>      enums;
    std::vector<StructDef>    structs;
    std::vector<FunctionDecl> functions;

    const FunctionDecl* find_function(std::string_view name) const;
    const StructDef*    find_struct(std::string_view name) const;
    const EnumDef*      find_enum(std::string_view name) const;
    bool                is_handle_type(std::string_view name) const;

    bool operator==(const ApiModel&) const = default;
};

/// How a C type text resolves against a model.
struct TypeInfo
{
    enum class Category : std::uint8_t
    {
        void_type,
        scalar,
        handle,
        enumeration,
        structure,
    };

    std::string base;           // type name without qualifiers and stars
    int         pointer_depth = 0;
    bool        is_const      = false;
    Category    category      = Category::scalar;
    ScalarKind  scalar_kind   = ScalarKind::u64;  // of the base type
    std::uint32_t width       = 0;                // of the base type, bytes

    bool is_address() const noexcept { return pointer_depth > 0 || category == Category::handle; }
    bool is_c_string() const noexcept
    {
        return pointer_depth == 1 && is_const && base == "char";
    }
};

/// Resolves `c_type` (e.g. "const ze_event_handle_t*") against the model.
/// Throws ModelError for unknown base names.
TypeInfo resolve_type(const ApiModel& model, std::string_view c_type);

/// Size in bytes of a struct laid out with natural alignment.
std::uint64_t struct_size(const StructDef& def);

/// Byte offset of every field under natural alignment, parallel to `fields`.
std::vector<std::uint64_t> struct_offsets(const StructDef& def);

/// Size in bytes of one element behind a pointer of type `c_type`.
std::uint64_t pointee_size(const ApiModel& model, std::string_view c_type);

/// Checks every invariant (unique names, resolvable types, deref rules).
/// Throws ModelError or SchemaError.
void validate_model(const ApiModel& model);

std::string_view to_string(Direction d);
std::string_view to_string(FunctionAttr a);
std::string_view to_string(ScalarKind k);
std::optional<Direction>    direction_from_string(std::string_view s);
std::optional<FunctionAttr> attr_from_string(std::string_view s);
std::optional<ScalarKind>   scalar_kind_from_string(std::string_view s);

// --- header ingestion ------------------------------------------------------

/// Parses the restricted C declaration grammar (handle typedefs, enums,
/// structs, prototypes). Preprocessor lines and comments are skipped.
/// All parameter directions come back `unknown`.
ApiModel parse_header_decls(std::string_view source_text, std::string api_name = "api",
                            std::string version = "0");

// --- YAML ------------------------------------------------------------------

ApiModel    load_api_model_yaml(std::string_view document);
std::string to_yaml(const ApiModel& model);

/// 64-bit FNV-1a over `to_yaml(model)`.
std::uint64_t model_fingerprint(const ApiModel& model);

// --- meta-parameters -------------------------------------------------------

struct ParamOverlay
{
    std::string              name;
    std::optional<Direction> direction;
    std::optional<DerefSpec> deref;

    bool operator==(const ParamOverlay&) const = default;
};

struct FunctionOverlay
{
    std::string               name;
    FunctionAttrs             attrs;
    std::vector<ParamOverlay> params;

    bool operator==(const FunctionOverlay&) const = default;
};

struct MetaParams
{
    std::vector<FunctionOverlay> functions;

    bool empty() const noexcept { return functions.empty(); }
};

MetaParams load_meta_params_yaml(std::string_view document);

/// Applies expert overlays. Value parameters of a touched function whose
/// direction is still unknown become `in`; address parameters keep what the
/// overlay says. Throws ModelError on dangling references or conflicts.
ApiModel apply_meta_params(const ApiModel& model, const MetaParams& meta);
}  // namespace hapi::model
