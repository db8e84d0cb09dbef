#pragma once

#include "hapi/model/api_model.hpp"
#include "hapi/schema/schema.hpp"

#include <string>

namespace hapi::codegen
{
struct InterposerOptions
{
    /// Header declaring the traced API, included by the generated file.
    /// Empty means "<api_name>.h".
    std::string api_header;
};

/// C99 + POSIX source for a preloadable interposition library. Every model
/// function gets a same-signature wrapper that emits entry, calls the next
/// definition of the symbol, then emits exit (and asks an optional
/// `hapi_profiling_hook` for device records when the function is profiled).
///
/// Runtime environment: HAPITRACE_DIR enables tracing into that directory,
/// HAPITRACE_MODE selects minimal|default|full (default "default").
///
/// Byte-identical for identical inputs. Throws ModelError when `registry`
/// was not generated from `model`.
std::string emit_interposer_source(const model::ApiModel& model,
                                   const schema::SchemaRegistry& registry,
                                   const InterposerOptions& options = {});
}  // namespace hapi::codegen
