#include "amiroar/ndr/ndr.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace amiroar::ndr {

Ndr::Ndr(const NdrModel& model, sim::VirtualClock* clock, std::ostream* protocol_log, std::ostream* cef)
    : fdi_(model.config, model.inventory, model.profiles),
      ddos_(model.config, model.inventory, model.rate_baselines),
      clock_(clock),
      protocol_log_(protocol_log),
      cef_(cef) {}

Ndr::~Ndr() {
  if (clock_ && timer_) clock_->cancel(timer_->second);
}

void Ndr::feed(const sim::DlmsMessage& m) { feed(dissect(m)); }

void Ndr::feed(const ProtocolLogRecord& r) {
  if (last_ && r.timestamp < *last_)
    throw std::invalid_argument("record at " + format_iso8601(r.timestamp) + " precedes " + format_iso8601(*last_));
  last_ = r.timestamp;
  ++records_;
  if (protocol_log_) *protocol_log_ << to_line(r) << '\n';
  advance(r.timestamp);
  std::vector<Alert> batch;
  fdi_.observe(r, batch);
  ddos_.observe(r, batch);
  dispatch(batch);
  rearm();
}

void Ndr::flush() {
  advance(TimePoint::max());
  if (clock_ && timer_) clock_->cancel(timer_->second);
  timer_.reset();
}

void Ndr::advance(TimePoint t) {
  std::vector<Alert> batch;
  fdi_.advance_to(t, batch);
  ddos_.advance_to(t, batch);
  dispatch(batch);
}

void Ndr::dispatch(std::vector<Alert>& batch) {
  for (auto& a : batch) {
    if (cef_) *cef_ << emit_cef(a) << '\n';
    alerts_.push_back(a);
    for (const auto& s : sinks_) s(alerts_.back());
  }
}

void Ndr::rearm() {
  if (!clock_) return;
  std::optional<TimePoint> next = fdi_.next_deadline();
  if (auto d = ddos_.next_deadline(); d && (!next || *d < *next)) next = d;
  if (timer_ && next && timer_->first == *next) return;
  if (timer_) clock_->cancel(timer_->second);
  timer_.reset();
  if (!next) return;
  const TimePoint fire = std::max(*next + std::chrono::milliseconds{1}, clock_->now());
  auto id = clock_->schedule_at(fire, [this] {
    timer_.reset();
    advance(clock_->now());
    rearm();
  });
  timer_ = {*next, id};
}

std::vector<Alert> replay_capture(std::istream& capture, const NdrModel& model, std::ostream* cef) {
  Ndr ndr(model, nullptr, nullptr, cef);
  std::string line;
  std::size_t n = 0;
  while (std::getline(capture, line)) {
    ++n;
    if (line.empty()) continue;
    sim::DlmsMessage m;
    try {
      m = sim::parse_line(line);
    } catch (const std::exception& e) {
      throw std::invalid_argument("capture line " + std::to_string(n) + ": " + e.what());
    }
    try {
      ndr.feed(m);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("capture line " + std::to_string(n) + ": " + e.what());
    }
  }
  ndr.flush();
  return ndr.alerts();
}

}  // namespace amiroar::ndr
