#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "amiroar/ndr/detector.hpp"
#include "amiroar/sim/virtual_clock.hpp"

namespace amiroar::ndr {

/// Dissects delivered messages and runs both detectors. With a clock, pending
/// decisions settle on a timer 1 ms after their deadline; without one they
/// settle when later traffic arrives or on flush(). Both paths produce the
/// same alerts for the same records.
class Ndr {
 public:
  using AlertSink = std::function<void(const Alert&)>;

  Ndr(const NdrModel& model, sim::VirtualClock* clock = nullptr, std::ostream* protocol_log = nullptr,
      std::ostream* cef = nullptr);
  ~Ndr();
  Ndr(const Ndr&) = delete;
  Ndr& operator=(const Ndr&) = delete;

  void on_alert(AlertSink sink) { sinks_.push_back(std::move(sink)); }

  void feed(const sim::DlmsMessage& m);
  /// Records must arrive with non-decreasing timestamps; throws
  /// std::invalid_argument otherwise.
  void feed(const ProtocolLogRecord& r);
  /// Settles every pending decision.
  void flush();

  const std::vector<Alert>& alerts() const { return alerts_; }
  const FdiDetector& fdi() const { return fdi_; }
  const DdosDetector& ddos() const { return ddos_; }
  std::uint64_t records() const { return records_; }

 private:
  void advance(TimePoint t);
  void dispatch(std::vector<Alert>& batch);
  void rearm();

  FdiDetector fdi_;
  DdosDetector ddos_;
  sim::VirtualClock* clock_;
  std::ostream* protocol_log_;
  std::ostream* cef_;
  std::vector<AlertSink> sinks_;
  std::vector<Alert> alerts_;
  std::optional<TimePoint> last_;
  std::optional<std::pair<TimePoint, sim::VirtualClock::EventId>> timer_;
  std::uint64_t records_ = 0;
};

/// Offline detection over a capture (JSON lines of DLMS messages). Throws
/// std::invalid_argument on a malformed line or decreasing timestamps.
std::vector<Alert> replay_capture(std::istream& capture, const NdrModel& model, std::ostream* cef = nullptr);

}  // namespace amiroar::ndr
