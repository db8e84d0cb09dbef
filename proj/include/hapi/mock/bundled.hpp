#pragma once

#include "hapi/model/api_model.hpp"
#include "hapi/schema/schema.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hapi::mock
{
inline constexpr std::string_view api_name    = "ze";
inline constexpr std::string_view api_version = "1.0";

/// Text of `ze_mock.h`.
std::string_view header_text();
/// Text of the meta-parameter overlay for the mock API.
std::string_view meta_text();

/// Header-only model for the automatic scenario, header plus meta for hybrid.
const model::ApiModel& mock_model(schema::Scenario scenario);

/// Names of the bundled workloads ("W1", "W2", "W3").
std::vector<std::string> bundled_workload_names();
/// YAML text of a bundled workload, looked up by name.
std::optional<std::string_view> bundled_workload(std::string_view name);
}  // namespace hapi::mock
