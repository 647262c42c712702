#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "amiroar/response/cases.hpp"

namespace amiroar::response {

enum class NotificationKind { triggered, resolved };
std::string_view to_string(NotificationKind k);

struct Notification {
  std::string channel;
  std::string recipient;
  std::string body;
  TimePoint sent_at;
  NotificationKind kind = NotificationKind::triggered;
  std::string case_id;
  std::vector<std::string> pivots;
};

/// Chat-style sink: each configured channel has one recipient; messages are
/// appended to a log file.
class NotificationHub {
 public:
  NotificationHub(std::map<std::string, std::string> channels, std::filesystem::path log = {});

  /// Unknown channel -> 404. A resolved notification needs an existing case
  /// in `cases` and at least one pivot (409 otherwise).
  Notification notify(NotificationKind kind, const std::string& channel, const std::string& case_id,
                      const std::string& body, std::vector<std::string> pivots, TimePoint now,
                      const CaseStore* cases);

  std::vector<Notification> sent() const;
  bool has_channel(const std::string& channel) const { return channels_.count(channel) > 0; }

 private:
  std::map<std::string, std::string> channels_;
  std::filesystem::path log_;
  mutable std::mutex mu_;
  std::vector<Notification> sent_;
};

/// `<iso> [channel] @recipient kind case=<id>: body | pivots: a b`
std::string format_notification(const Notification& n);

}  // namespace amiroar::response
