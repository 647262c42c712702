#include "amiroar/engine/connector.hpp"

namespace amiroar::engine {

void ConnectorRegistry::add(std::string prefix, std::shared_ptr<Connector> connector) {
  for (auto& e : entries_) {
    if (e.first == prefix) {
      e.second = std::move(connector);
      return;
    }
  }
  entries_.emplace_back(std::move(prefix), std::move(connector));
}

Connector* ConnectorRegistry::resolve(std::string_view url) const {
  Connector* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& [prefix, c] : entries_) {
    if (url.starts_with(prefix) && (best == nullptr || prefix.size() > best_len)) {
      best = c.get();
      best_len = prefix.size();
    }
  }
  return best;
}

std::vector<std::string> ConnectorRegistry::prefixes() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

}  // namespace amiroar::engine
