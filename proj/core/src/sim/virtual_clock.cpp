#include "amiroar/sim/virtual_clock.hpp"

#include <stdexcept>
#include <thread>

namespace amiroar::sim {

VirtualClock::VirtualClock(TimePoint start, double real_time_scale)
    : now_(start), scale_(real_time_scale) {
  if (real_time_scale < 0.0) throw std::invalid_argument("clock scale must be >= 0");
}

VirtualClock::EventId VirtualClock::schedule_at(TimePoint at, Callback cb) {
  if (at < now_)
    throw std::invalid_argument("cannot schedule event in the past (" + format_iso8601(at) + " < " +
                                format_iso8601(now_) + ")");
  EventId id = next_id_++;
  live_.insert(id);
  queue_.push(Event{at, id, std::move(cb)});
  return id;
}

VirtualClock::EventId VirtualClock::schedule_after(Duration delay, Callback cb) {
  if (delay.count() < 0) throw std::invalid_argument("negative delay");
  return schedule_at(now_ + delay, std::move(cb));
}

bool VirtualClock::cancel(EventId id) {
  if (live_.erase(id) == 0) return false;
  cancelled_.insert(id);
  return true;
}

void VirtualClock::fire(Event ev) {
  if (scale_ > 0.0 && ev.at > now_) {
    auto gap = std::chrono::duration<double, std::milli>(static_cast<double>((ev.at - now_).count()) / scale_);
    std::this_thread::sleep_for(gap);
  }
  now_ = ev.at;
  live_.erase(ev.id);
  ++fired_;
  ev.cb();
}

bool VirtualClock::step() {
  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    if (cancelled_.erase(ev.id) > 0) continue;
    fire(std::move(ev));
    return true;
  }
  return false;
}

void VirtualClock::run_until(TimePoint until) {
  while (!queue_.empty()) {
    if (queue_.top().at > until) break;
    Event ev = queue_.top();
    queue_.pop();
    if (cancelled_.erase(ev.id) > 0) continue;
    fire(std::move(ev));
  }
  if (until > now_) now_ = until;
}

bool VirtualClock::run_while_pending(const std::function<bool()>& done) {
  while (!done()) {
    if (!step()) break;
  }
  return done();
}

void VirtualClock::run() {
  while (step()) {
  }
}

}  // namespace amiroar::sim
