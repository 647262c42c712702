#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "amiroar/cacao/graph.hpp"
#include "amiroar/cacao/playbook.hpp"
#include "amiroar/engine/connector.hpp"
#include "amiroar/engine/trace.hpp"
#include "amiroar/ndr/alert.hpp"
#include "amiroar/sim/virtual_clock.hpp"

namespace amiroar::engine {

/// Manual commands are sent to this url so that the case connector can
/// attach them as tasks; register the case connector under `manual:`.
inline constexpr std::string_view kManualTaskUrl = "manual:task";

struct LatencyModel {
  Duration min{std::chrono::seconds{5}};
  Duration max{std::chrono::seconds{10}};
};

struct ExecutionContext {
  std::string playbook_id;
  cacao::Bindings bindings;
  sim::VirtualClock* clock = nullptr;
  const ConnectorRegistry* registry = nullptr;
  LatencyModel latency;
  /// Seeds the latency draws; runs with equal seeds produce equal traces.
  std::uint64_t seed = 0;
  std::string alert_id;
  std::string signature_id;
  std::string device_class;
  TimePoint detection_time;
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoPlaybookError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Pure; throws cacao::UnboundVariableError when the lhs is unbound.
bool evaluate_condition(const cacao::ConditionExpr& c, const cacao::Bindings& bindings);

/// Bindings seen by `step`: playbook defaults, then the context, then the
/// step's own variables.
cacao::Bindings effective_bindings(const cacao::Playbook& p, const cacao::WorkflowStep& step,
                                   const cacao::Bindings& context);

/// Starts executing `p` on the context's clock and returns immediately; the
/// callback receives the finished trace. Throws EngineError when `p` does
/// not validate.
void launch(std::shared_ptr<const cacao::Playbook> p, ExecutionContext ctx,
            std::function<void(ExecutionTrace)> on_done);

/// Runs the clock until the playbook finishes.
ExecutionTrace execute(const cacao::Playbook& p, ExecutionContext ctx);

/// Alert signature id -> playbook.
class PlaybookRouter {
 public:
  void add(std::string signature_id, std::shared_ptr<const cacao::Playbook> playbook);
  /// Throws NoPlaybookError.
  std::shared_ptr<const cacao::Playbook> select(std::string_view signature_id) const;

 private:
  std::map<std::string, std::shared_ptr<const cacao::Playbook>, std::less<>> routes_;
};

/// Variables seeded from an alert: __alert_id__, __case_id__,
/// __sandbox_vlan__, __victim_ip__, __offender_ip__, __offender_ips__,
/// __device_class__, __signature_id__, __playbook_id__, __detection_time__,
/// __suspect_meter_ip__, __suspect_headend_ip__.
cacao::Bindings bindings_from_alert(const ndr::Alert& alert, const std::string& playbook_id);

/// Context for handling `alert` with the given services.
ExecutionContext context_for_alert(const ndr::Alert& alert, const cacao::Playbook& p,
                                   sim::VirtualClock& clock, const ConnectorRegistry& registry,
                                   LatencyModel latency, std::uint64_t seed);

void launch_for_alert(const ndr::Alert& alert, const PlaybookRouter& router,
                      sim::VirtualClock& clock, const ConnectorRegistry& registry,
                      LatencyModel latency, std::uint64_t seed,
                      std::function<void(ExecutionTrace)> on_done);

/// Selects the playbook for the alert's signature and executes it to completion.
ExecutionTrace on_alert(const ndr::Alert& alert, const PlaybookRouter& router,
                        sim::VirtualClock& clock, const ConnectorRegistry& registry,
                        LatencyModel latency = {}, std::uint64_t seed = 0);

}  // namespace amiroar::engine
