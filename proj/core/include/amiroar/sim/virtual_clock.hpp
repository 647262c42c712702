#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "amiroar/common/time.hpp"

namespace amiroar::sim {

/// Discrete-event scheduler shared by the simulator, the detectors and the
/// playbook engine. Events fire in timestamp order; ties fire in insertion
/// order. `now()` never decreases.
///
/// With a positive `real_time_scale`, firing an event first sleeps for the
/// elapsed virtual gap divided by the scale (1.0 = wall-clock speed). The
/// default of 0 runs fully virtual.
class VirtualClock {
 public:
  using Callback = std::function<void()>;
  using EventId = std::uint64_t;

  explicit VirtualClock(TimePoint start = TimePoint{}, double real_time_scale = 0.0);

  TimePoint now() const { return now_; }
  double real_time_scale() const { return scale_; }

  /// Throws std::invalid_argument when `at` lies in the past.
  EventId schedule_at(TimePoint at, Callback cb);
  EventId schedule_after(Duration delay, Callback cb);
  /// Returns false when the event already fired or was cancelled.
  bool cancel(EventId id);

  /// Fires the next event. Returns false when the queue is empty.
  bool step();
  /// Fires every event with time <= `until`, then advances now() to `until`.
  void run_until(TimePoint until);
  /// Fires events until `done()` holds or the queue drains. Returns done().
  bool run_while_pending(const std::function<bool()>& done);
  void run();

  std::size_t pending() const { return live_.size(); }
  std::uint64_t fired() const { return fired_; }

 private:
  struct Event {
    TimePoint at;
    EventId id;
    Callback cb;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.id > b.id;
    }
  };

  void fire(Event ev);

  TimePoint now_;
  double scale_;
  EventId next_id_ = 1;
  std::uint64_t fired_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_set<EventId> live_;
  std::unordered_set<EventId> cancelled_;
};

}  // namespace amiroar::sim
