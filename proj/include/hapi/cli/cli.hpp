#pragma once

#include <ostream>

namespace hapi::cli
{
/// Entry point of the `hapitrace` tool. Returns the process exit status:
/// 0 on success, 1 on harness errors (and on validation findings), 2 on
/// bad usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
}  // namespace hapi::cli
