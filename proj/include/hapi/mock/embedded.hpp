#pragma once

#include <span>
#include <string_view>

namespace hapi::mock
{
/// A data file compiled into the binary.
struct EmbeddedFile
{
    std::string_view name;
    std::string_view text;
};

/// The mock header, its meta overlay and the bundled workloads.
std::span<const EmbeddedFile> embedded_files();
}  // namespace hapi::mock
