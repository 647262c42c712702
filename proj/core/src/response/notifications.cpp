#include "amiroar/response/notifications.hpp"

#include <fstream>

namespace amiroar::response {

std::string_view to_string(NotificationKind k) {
  return k == NotificationKind::triggered ? "triggered" : "resolved";
}

NotificationHub::NotificationHub(std::map<std::string, std::string> channels, std::filesystem::path log)
    : channels_(std::move(channels)), log_(std::move(log)) {
  if (!log_.empty() && log_.has_parent_path()) std::filesystem::create_directories(log_.parent_path());
}

Notification NotificationHub::notify(NotificationKind kind, const std::string& channel, const std::string& case_id,
                                     const std::string& body, std::vector<std::string> pivots, TimePoint now,
                                     const CaseStore* cases) {
  auto ch = channels_.find(channel);
  if (ch == channels_.end()) throw ServiceError(404, "unknown channel " + channel);
  if (case_id.empty()) throw ServiceError(400, "case_id is required");
  if (kind == NotificationKind::resolved) {
    if (!cases || !cases->get(case_id)) throw ServiceError(409, "resolved notification for unknown case " + case_id);
    if (pivots.empty()) throw ServiceError(409, "resolved notification without pivot links");
  }
  Notification n{channel, ch->second, body, now, kind, case_id, std::move(pivots)};
  std::lock_guard lock(mu_);
  if (!log_.empty()) {
    std::ofstream out(log_, std::ios::app);
    if (!out) throw ServiceError(503, "channel " + channel + " unavailable");
    out << format_notification(n) << '\n';
  }
  sent_.push_back(n);
  return n;
}

std::vector<Notification> NotificationHub::sent() const {
  std::lock_guard lock(mu_);
  return sent_;
}

std::string format_notification(const Notification& n) {
  std::string line = format_iso8601(n.sent_at) + " [" + n.channel + "] @" + n.recipient + " " +
                     std::string(to_string(n.kind)) + " case=" + n.case_id + ": " + n.body;
  if (!n.pivots.empty()) {
    line += " | pivots:";
    for (const auto& p : n.pivots) line += " " + p;
  }
  return line;
}

}  // namespace amiroar::response
