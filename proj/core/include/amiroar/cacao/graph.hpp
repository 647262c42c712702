#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amiroar/cacao/playbook.hpp"

namespace amiroar::cacao {

/// Steps reachable from `from` (inclusive), ignoring dangling edges.
std::set<std::string> reachable_from(const Playbook& p, const std::string& from);

/// Topological order of all steps; nullopt when the graph has a cycle.
/// `cycle_at` receives one step on a cycle when provided.
std::optional<std::vector<std::string>> topological_order(const Playbook& p,
                                                         std::string* cycle_at = nullptr);

/// The continuation of a parallel step: the earliest step (in topological
/// order) reachable from every branch head. Requires an acyclic graph.
std::optional<std::string> join_of(const Playbook& p, const WorkflowStep& parallel);

/// True when every path leaving `head` passes through `join` before any end step.
bool all_paths_reach(const Playbook& p, const std::string& head, const std::string& join);

/// Join step of every parallel step, computed once per playbook.
std::map<std::string, std::string> parallel_joins(const Playbook& p);

}  // namespace amiroar::cacao
