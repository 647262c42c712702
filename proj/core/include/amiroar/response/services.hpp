#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amiroar/engine/connector.hpp"
#include "amiroar/ndr/alert.hpp"
#include "amiroar/response/cases.hpp"
#include "amiroar/response/notifications.hpp"
#include "amiroar/response/reports.hpp"
#include "amiroar/sdn/switch.hpp"
#include "amiroar/sim/simulator.hpp"

// Mock third-party services behind the playbook's connector urls. Each
// connector answers JSON and maps service errors to HTTP statuses.
namespace amiroar::response {

using AlertLookup = std::function<const ndr::Alert*(const std::string& alert_id)>;

/// POST /case (open), POST /case/update ({case_id, complete, status});
/// requests to `manual:` attach the step's description as a case note.
class CaseConnector : public engine::Connector {
 public:
  CaseConnector(CaseStore& store, AlertLookup alerts = {}) : store_(store), alerts_(std::move(alerts)) {}
  std::string name() const override { return "cases"; }
  void call(const HttpRequest& req, sim::VirtualClock& clock, Done done) override;

 private:
  HttpResponse handle(const HttpRequest& req, TimePoint now);
  CaseStore& store_;
  AlertLookup alerts_;
};

/// POST /hooks/<channel> with {kind, case_id, alert_id, playbook_id, text}.
class NotificationConnector : public engine::Connector {
 public:
  /// `pivots` lists investigation links for a resolved case.
  using PivotFn = std::function<std::vector<std::string>(const std::string& case_id, const std::string& alert_id)>;

  NotificationConnector(NotificationHub& hub, const CaseStore& cases, PivotFn pivots)
      : hub_(hub), cases_(cases), pivots_(std::move(pivots)) {}
  std::string name() const override { return "notifications"; }
  void call(const HttpRequest& req, sim::VirtualClock& clock, Done done) override;

 private:
  NotificationHub& hub_;
  const CaseStore& cases_;
  PivotFn pivots_;
};

/// POST /standby/activate, /primary/reset, /polling/resume.
class HeadendConnector : public engine::Connector {
 public:
  explicit HeadendConnector(sim::Simulator& sim) : sim_(sim) {}
  std::string name() const override { return "headend"; }
  void call(const HttpRequest& req, sim::VirtualClock& clock, Done done) override;

 private:
  sim::Simulator& sim_;
};

struct FirmwareDurations {
  Duration fetch{std::chrono::seconds{60}};
  Duration install{std::chrono::seconds{900}};
  Duration reboot{std::chrono::seconds{900}};

  Duration total() const { return fetch + install + reboot; }
};

enum class FirmwarePhase { fetch, install, reboot, done };
std::string_view to_string(FirmwarePhase p);

struct FirmwareJob {
  std::string meter_id;
  std::string target_version;
  FirmwarePhase phase = FirmwarePhase::fetch;
  TimePoint started;
  /// End time of each finished phase, in order.
  std::vector<std::pair<FirmwarePhase, TimePoint>> completed;
};

/// POST /reinstall {meter_ip, target_version}. The meter must be sandboxed;
/// it stays reinstalling through fetch, install and reboot, then becomes
/// operational with the new firmware while still isolated, pending restore.
class FirmwareConnector : public engine::Connector {
 public:
  FirmwareConnector(sim::Simulator& sim, FirmwareDurations d) : sim_(sim), d_(d) {}
  std::string name() const override { return "firmware"; }
  void call(const HttpRequest& req, sim::VirtualClock& clock, Done done) override;
  bool simulated_latency() const override { return false; }

  const std::vector<FirmwareJob>& jobs() const { return jobs_; }

 private:
  sim::Simulator& sim_;
  FirmwareDurations d_;
  std::vector<FirmwareJob> jobs_;
};

/// POST /export {case_id}: writes the early-warning and notification reports.
/// The final and consolidated reports need the finished trace and are
/// written by whoever observes the playbook's completion.
class ReportConnector : public engine::Connector {
 public:
  using Sink = std::function<void(const IncidentReport&)>;

  ReportConnector(const CaseStore& cases, Sink sink) : cases_(cases), sink_(std::move(sink)) {}
  std::string name() const override { return "reports"; }
  void call(const HttpRequest& req, sim::VirtualClock& clock, Done done) override;

 private:
  const CaseStore& cases_;
  Sink sink_;
};

/// POST /verify-mitigation {offenders}: 200 when every offender is rate
/// limited at the switch, 409 otherwise.
class MitigationCheckConnector : public engine::Connector {
 public:
  explicit MitigationCheckConnector(const sdn::SdnSwitch& sw) : sw_(sw) {}
  std::string name() const override { return "ndr"; }
  void call(const HttpRequest& req, sim::VirtualClock& clock, Done done) override;

 private:
  const sdn::SdnSwitch& sw_;
};

/// Wraps the switch's REST front end.
std::shared_ptr<engine::Connector> make_sdn_connector(sdn::SdnSwitch& sw);

}  // namespace amiroar::response
