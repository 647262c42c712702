#include "amiroar/cacao/graph.hpp"

#include <algorithm>
#include <functional>

namespace amiroar::cacao {

std::set<std::string> reachable_from(const Playbook& p, const std::string& from) {
  std::set<std::string> seen;
  std::vector<std::string> stack{from};
  while (!stack.empty()) {
    auto id = std::move(stack.back());
    stack.pop_back();
    const auto* s = p.find_step(id);
    if (!s || !seen.insert(id).second) continue;
    for (auto& n : s->successors()) stack.push_back(n);
  }
  return seen;
}

std::optional<std::vector<std::string>> topological_order(const Playbook& p,
                                                         std::string* cycle_at) {
  // Iterative DFS with colors; emits reverse postorder.
  enum Color { white, grey, black };
  std::map<std::string, Color> color;
  for (const auto& [id, _] : p.workflow) color[id] = white;
  std::vector<std::string> post;

  auto visit = [&](const std::string& root) -> bool {
    std::vector<std::pair<std::string, std::size_t>> stack{{root, 0}};
    color[root] = grey;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      auto succ = p.workflow.at(id).successors();
      if (next < succ.size()) {
        const auto& n = succ[next++];
        auto c = color.find(n);
        if (c == color.end()) continue;
        if (c->second == grey) {
          if (cycle_at) *cycle_at = n;
          return false;
        }
        if (c->second == white) {
          c->second = grey;
          stack.emplace_back(n, 0);
        }
      } else {
        color[id] = black;
        post.push_back(id);
        stack.pop_back();
      }
    }
    return true;
  };

  // Visit the start first so the order follows the workflow where possible.
  if (p.workflow.count(p.workflow_start) && !visit(p.workflow_start)) return std::nullopt;
  for (const auto& [id, _] : p.workflow) {
    if (color[id] == white && !visit(id)) return std::nullopt;
  }
  std::reverse(post.begin(), post.end());
  return post;
}

std::optional<std::string> join_of(const Playbook& p, const WorkflowStep& parallel) {
  if (!parallel.next_steps || parallel.next_steps->empty()) return std::nullopt;
  auto order = topological_order(p);
  if (!order) return std::nullopt;
  std::vector<std::set<std::string>> reach;
  for (const auto& head : *parallel.next_steps) reach.push_back(reachable_from(p, head));
  for (const auto& id : *order) {
    bool common = std::all_of(reach.begin(), reach.end(),
                              [&](const auto& r) { return r.count(id) > 0; });
    if (common) return id;
  }
  return std::nullopt;
}

bool all_paths_reach(const Playbook& p, const std::string& head, const std::string& join) {
  std::map<std::string, bool> memo;
  std::function<bool(const std::string&)> ok = [&](const std::string& id) -> bool {
    if (id == join) return true;
    if (auto m = memo.find(id); m != memo.end()) return m->second;
    const auto* s = p.find_step(id);
    bool result = false;
    if (s && s->kind != StepKind::end) {
      auto succ = s->successors();
      result = !succ.empty() && std::all_of(succ.begin(), succ.end(), ok);
    }
    memo[id] = result;
    return result;
  };
  return ok(head);
}

std::map<std::string, std::string> parallel_joins(const Playbook& p) {
  std::map<std::string, std::string> out;
  for (const auto& [id, s] : p.workflow) {
    if (s.kind != StepKind::parallel) continue;
    if (auto j = join_of(p, s)) out.emplace(id, *j);
  }
  return out;
}

}  // namespace amiroar::cacao
