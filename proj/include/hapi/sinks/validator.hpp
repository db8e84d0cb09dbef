#pragma once

#include "hapi/model/api_model.hpp"
#include "hapi/pipeline/pipeline.hpp"

#include <map>
#include <string>
#include <vector>

namespace hapi::sinks
{
enum class Rule : std::uint8_t
{
    uninit_pnext,
    leaked_event,
    cmdlist_not_reset,
    orphan_exit,
};

std::string_view to_string(Rule r);

struct ValidationFinding
{
    Rule            rule = Rule::uninit_pnext;
    std::uint64_t   subject = 0;  // handle or address the finding is about
    trace::StreamId stream;       // first offending event
    std::uint64_t   timestamp_ns = 0;
    std::string     function;
    std::string     message;
};

std::string format_finding(const ValidationFinding& f);

/// Post-mortem misuse checks over the muxed events of a hybrid trace.
///
/// - uninit_pnext: an entry whose `*_pNext` field is nonzero.
/// - leaked_event: a handle from a successful `creates_handle` call never
///   passed to a `releases_handle` call.
/// - cmdlist_not_reset: a command list executed again without a reset.
/// - orphan_exit: an exit with no open entry on its thread.
class ValidatorSink final : public pipeline::Sink
{
public:
    /// `model` supplies the handle attributes; it must be the model the
    /// trace's registry was generated from (checked in on_start).
    explicit ValidatorSink(const model::ApiModel& model);

    std::string_view name() const override { return "validate"; }
    pipeline::Tap    tap() const override { return pipeline::Tap::muxed; }
    void             on_start(const pipeline::PipelineContext& ctx) override;
    void             on_message(const pipeline::Message& msg) override;
    void             on_finish() override;

    const std::vector<ValidationFinding>& findings() const noexcept { return m_findings; }

private:
    struct Site
    {
        trace::StreamId stream;
        std::uint64_t   timestamp_ns = 0;
        std::string     function;
    };

    void on_entry(const pipeline::EventMessage& e, const std::string& fn);
    void on_exit(const pipeline::EventMessage& e, const std::string& fn);

    const model::ApiModel*                                m_model;
    std::map<std::string, model::FunctionAttrs, std::less<>> m_attrs;
    std::map<trace::StreamId, std::vector<std::string>>   m_open;       // per-thread entry stack
    std::map<trace::StreamId, std::vector<std::uint64_t>> m_open_handles;  // first handle arg per frame
    std::map<std::uint64_t, Site>                         m_live;       // created, not released
    std::map<std::uint64_t, bool>                         m_executed;   // list -> executed since reset
    std::vector<ValidationFinding>                        m_findings;
};
}  // namespace hapi::sinks
