#include <algorithm>
#include <set>
#include <sstream>

#include "amiroar/cacao/graph.hpp"
#include "amiroar/cacao/playbook.hpp"

namespace amiroar::cacao {

namespace {

constexpr std::string_view kMethods[] = {"GET", "POST", "PUT", "PATCH", "DELETE"};

struct Collector {
  std::vector<Finding> out;

  void error(FindingCode code, std::string where, std::string message) {
    out.push_back({Severity::error, code, std::move(where), std::move(message)});
  }
  void warning(FindingCode code, std::string where, std::string message) {
    out.push_back({Severity::warning, code, std::move(where), std::move(message)});
  }
};

void check_variables(Collector& c, const Bindings& vars, const std::string& where) {
  for (const auto& [key, v] : vars) {
    if (!is_variable_name(key))
      c.error(FindingCode::bad_variable, where + "." + key,
              "variable name must have the form __name__");
    if (v.name != key)
      c.error(FindingCode::bad_variable, where + "." + key, "variable name does not match its key");
    if (v.bound() && !value_matches_type(v.type, v.value))
      c.error(FindingCode::bad_variable, where + "." + key,
              "value '" + v.value + "' is not a valid " + std::string(to_string(v.type)));
  }
}

const Variable* lookup(const Playbook& p, const WorkflowStep& s, const std::string& name) {
  if (auto it = s.step_variables.find(name); it != s.step_variables.end()) return &it->second;
  if (auto it = p.playbook_variables.find(name); it != p.playbook_variables.end())
    return &it->second;
  return nullptr;
}

void check_presence(Collector& c, const WorkflowStep& s) {
  const bool want_completion = s.kind == StepKind::start || s.kind == StepKind::action;
  const bool want_next = s.kind == StepKind::parallel;
  const bool want_cond = s.kind == StepKind::if_condition;
  const bool want_cmds = s.kind == StepKind::action;
  const std::string kind(to_string(s.kind));

  auto field = [&](bool present, bool wanted, bool optional, const char* name) {
    if (present && !wanted)
      c.error(FindingCode::field_not_allowed, s.id,
              std::string("field '") + name + "' is not allowed on a " + kind + " step");
    else if (!present && wanted && !optional)
      c.error(FindingCode::missing_field, s.id,
              kind + " step requires field '" + name + "'");
  };
  field(s.on_completion.has_value(), want_completion, false, "on_completion");
  field(s.next_steps.has_value(), want_next, false, "next_steps");
  field(s.condition.has_value(), want_cond, false, "condition");
  field(s.on_true.has_value(), want_cond, false, "on_true");
  field(s.on_false.has_value(), want_cond, false, "on_false");
  field(s.commands.has_value(), want_cmds, false, "commands");
  field(s.agent.has_value(), want_cmds, true, "agent");
}

void check_step(Collector& c, const Playbook& p, const WorkflowStep& s) {
  if (s.id.empty())
    c.error(FindingCode::missing_field, "workflow", "step with empty id");
  check_presence(c, s);
  check_variables(c, s.step_variables, s.id + ".step_variables");

  for (const auto& target : s.successors()) {
    if (!p.workflow.count(target))
      c.error(FindingCode::dangling_reference, s.id, "references unknown step '" + target + "'");
  }
  if (s.next_steps) {
    if (s.next_steps->empty())
      c.error(FindingCode::missing_field, s.id, "parallel step has no next_steps");
    std::set<std::string> seen;
    for (const auto& n : *s.next_steps) {
      if (!seen.insert(n).second)
        c.error(FindingCode::duplicate_branch, s.id, "next_steps lists '" + n + "' twice");
    }
  }
  if (s.commands) {
    if (s.commands->empty())
      c.error(FindingCode::missing_field, s.id, "action step has no commands");
    for (std::size_t i = 0; i < s.commands->size(); ++i) {
      const auto& cmd = (*s.commands)[i];
      const auto where = s.id + ".commands[" + std::to_string(i) + "]";
      if (cmd.kind == CommandKind::http_api) {
        if (cmd.method.empty() || cmd.url.empty())
          c.error(FindingCode::bad_command, where, "http-api command needs method and url");
        else if (std::find(std::begin(kMethods), std::end(kMethods), cmd.method) ==
                 std::end(kMethods))
          c.error(FindingCode::bad_command, where, "unknown HTTP method '" + cmd.method + "'");
      } else if (cmd.body.empty()) {
        c.error(FindingCode::bad_command, where, "manual command needs an instruction body");
      }
      if (cmd.timeout <= Duration::zero())
        c.error(FindingCode::bad_command, where, "timeout must be positive");
      std::vector<std::string> names = placeholders_in(cmd.url);
      for (auto& n : placeholders_in(cmd.body)) names.push_back(n);
      for (const auto& [_, v] : cmd.headers)
        for (auto& n : placeholders_in(v)) names.push_back(n);
      for (const auto& n : names) {
        if (!lookup(p, s, n))
          c.error(FindingCode::bad_variable, where, "placeholder " + n + " is not declared");
      }
    }
  }
  if (s.agent && !p.agent_definitions.count(*s.agent))
    c.error(FindingCode::unknown_agent, s.id, "agent '" + *s.agent + "' is not defined");
  if (s.condition) {
    const auto& cond = *s.condition;
    const Variable* var = lookup(p, s, cond.lhs);
    if (!var) {
      c.error(FindingCode::bad_condition, s.id,
              "condition lhs '" + cond.lhs + "' is not a declared variable");
    }
    if (cond.rhs.empty())
      c.error(FindingCode::bad_condition, s.id, "condition rhs is empty");
    if (cond.op == ConditionOp::in && !cond.rhs_is_set)
      c.error(FindingCode::bad_condition, s.id, "operator 'in' needs a set of literals");
    if (cond.op != ConditionOp::in && (cond.rhs_is_set || cond.rhs.size() != 1))
      c.error(FindingCode::bad_condition, s.id,
              "operator '" + std::string(to_string(cond.op)) + "' needs a single literal");
    if (var) {
      for (const auto& lit : cond.rhs) {
        if (!value_matches_type(var->type, lit))
          c.error(FindingCode::bad_condition, s.id,
                  "literal '" + lit + "' is not a valid " + std::string(to_string(var->type)));
      }
    }
  }
}

}  // namespace

// Checks that need no graph traversal. parse_playbook() throws on the first
// error found here; validate() reports them all.
std::vector<Finding> local_findings(const Playbook& p) {
  Collector c;
  if (p.id.empty()) c.error(FindingCode::missing_field, "id", "playbook id is empty");
  if (p.name.empty()) c.error(FindingCode::missing_field, "name", "playbook name is empty");
  if (p.workflow.empty()) c.error(FindingCode::missing_field, "workflow", "workflow is empty");
  check_variables(c, p.playbook_variables, "playbook_variables");

  const auto* start = p.find_step(p.workflow_start);
  if (!start)
    c.error(FindingCode::dangling_reference, "workflow_start",
            "references unknown step '" + p.workflow_start + "'");
  else if (start->kind != StepKind::start)
    c.error(FindingCode::bad_start, "workflow_start",
            "step '" + p.workflow_start + "' is not a start step");

  for (const auto& [id, s] : p.workflow) {
    if (s.id != id)
      c.error(FindingCode::bad_start, id, "step id does not match its workflow key");
    check_step(c, p, s);
  }
  return c.out;
}

ValidationReport validate(const Playbook& p) {
  Collector c;
  c.out = local_findings(p);
  const bool dangling = std::any_of(c.out.begin(), c.out.end(), [](const Finding& f) {
    return f.code == FindingCode::dangling_reference;
  });

  if (!dangling) {
    std::string cycle_at;
    auto order = topological_order(p, &cycle_at);
    if (!order) {
      c.error(FindingCode::cycle, cycle_at, "workflow cycle through step '" + cycle_at + "'");
    } else {
      auto reach = reachable_from(p, p.workflow_start);
      bool end_reachable = std::any_of(reach.begin(), reach.end(), [&](const std::string& id) {
        return p.workflow.at(id).kind == StepKind::end;
      });
      if (!end_reachable)
        c.error(FindingCode::no_reachable_end, "workflow", "no reachable end step");

      for (const auto& [id, s] : p.workflow) {
        if (s.kind == StepKind::parallel && s.next_steps && !s.next_steps->empty()) {
          auto join = join_of(p, s);
          bool ok = join.has_value();
          if (ok) {
            for (const auto& head : *s.next_steps) ok = ok && all_paths_reach(p, head, *join);
          }
          if (!ok)
            c.error(FindingCode::parallel_no_join, id,
                    "parallel branches do not converge on a common continuation");
        }
        if (!reach.count(id))
          c.warning(FindingCode::unreachable_step, id, "step is unreachable from workflow_start");
      }
    }
  }

  ValidationReport r;
  r.findings = std::move(c.out);
  r.valid = r.error_count() == 0;
  return r;
}

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [](const Finding& f) { return f.severity == Severity::error; }));
}

ValidationReport validate_document(std::string_view text) {
  try {
    return validate(parse_playbook(text));
  } catch (const PlaybookError& e) {
    FindingCode code = FindingCode::schema_violation;
    if (e.kind() == PlaybookError::Kind::syntax) code = FindingCode::syntax_error;
    if (e.kind() == PlaybookError::Kind::unsupported) code = FindingCode::unsupported_construct;
    ValidationReport r{false, {Finding{Severity::error, code, "document", e.what()}}};
    for (const auto& f : e.findings()) r.findings.push_back(f);
    return r;
  }
}

std::string ValidationReport::render() const {
  std::ostringstream os;
  for (const auto& f : findings) {
    os << (f.severity == Severity::error ? "error" : "warning") << ": " << f.where << ": "
       << f.message << "\n";
  }
  os << (valid ? "valid" : "invalid") << " (" << error_count() << " error(s), "
     << findings.size() - error_count() << " warning(s))\n";
  return os.str();
}

}  // namespace amiroar::cacao
