#include "hapi/mock/bundled.hpp"

#include "hapi/error.hpp"
#include "hapi/mock/embedded.hpp"

namespace hapi::mock
{
namespace
{
std::optional<std::string_view> find_file(std::string_view name)
{
    for(const auto& f : embedded_files())
        if(f.name == name) return f.text;
    return std::nullopt;
}

std::string_view require_file(std::string_view name)
{
    auto f = find_file(name);
    if(!f) throw Error("missing embedded file " + std::string(name));
    return *f;
}

constexpr std::string_view workload_prefix = "workloads/";
}  // namespace

std::string_view header_text() { return require_file("ze_mock.h"); }
std::string_view meta_text() { return require_file("ze_mock.meta.yaml"); }

const model::ApiModel& mock_model(schema::Scenario scenario)
{
    static const model::ApiModel plain = model::parse_header_decls(
        header_text(), std::string(api_name), std::string(api_version));
    static const model::ApiModel hybrid =
        model::apply_meta_params(plain, model::load_meta_params_yaml(meta_text()));
    return scenario == schema::Scenario::hybrid ? hybrid : plain;
}

std::vector<std::string> bundled_workload_names()
{
    std::vector<std::string> names;
    for(const auto& f : embedded_files())
    {
        if(!f.name.starts_with(workload_prefix)) continue;
        auto n = f.name.substr(workload_prefix.size());
        names.emplace_back(n.substr(0, n.rfind('.')));
    }
    return names;
}

std::optional<std::string_view> bundled_workload(std::string_view name)
{
    return find_file(std::string(workload_prefix) + std::string(name) + ".yaml");
}
}  // namespace hapi::mock
