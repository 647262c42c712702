#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "amiroar/common/time.hpp"

// Data model for the supported subset of CACAO security playbooks: start, end,
// action, parallel and if-condition steps; http-api and manual commands;
// string, integer and ipv4-addr variables. Workflows are acyclic.

namespace amiroar::cacao {

enum class StepKind { start, end, action, parallel, if_condition };
enum class CommandKind { http_api, manual };
enum class VariableType { string, integer, ipv4_addr };
enum class ConditionOp { equals, not_equals, in };

std::string_view to_string(StepKind k);
std::string_view to_string(CommandKind k);
std::string_view to_string(VariableType t);
std::string_view to_string(ConditionOp op);
std::optional<StepKind> step_kind_from_string(std::string_view s);
std::optional<CommandKind> command_kind_from_string(std::string_view s);
std::optional<VariableType> variable_type_from_string(std::string_view s);
std::optional<ConditionOp> condition_op_from_string(std::string_view s);

/// Variables are named `__name__`. An empty value means "declared but not yet
/// bound"; execution seeds such variables from the triggering alert.
struct Variable {
  std::string name;
  VariableType type = VariableType::string;
  std::string value;
  bool constant = false;
  std::string description;
  nlohmann::json extensions = nlohmann::json::object();

  bool bound() const { return !value.empty(); }
  bool operator==(const Variable&) const = default;
};

using Bindings = std::map<std::string, Variable>;

struct ConditionExpr {
  std::string lhs;
  ConditionOp op = ConditionOp::equals;
  /// One literal for equals/not-equals, the candidate set for `in`.
  std::vector<std::string> rhs;
  bool rhs_is_set = false;

  bool operator==(const ConditionExpr&) const = default;
};

struct Command {
  CommandKind kind = CommandKind::http_api;
  std::string method;
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
  Duration timeout{std::chrono::seconds{30}};
  std::string description;
  nlohmann::json extensions = nlohmann::json::object();

  bool operator==(const Command&) const = default;
};

/// Optional members are "present" iff they carry a value; presence must match
/// the step kind exactly.
struct WorkflowStep {
  std::string id;
  StepKind kind = StepKind::action;
  std::string name;
  std::string description;
  std::optional<std::string> on_completion;
  std::optional<std::vector<std::string>> next_steps;
  std::optional<ConditionExpr> condition;
  std::optional<std::string> on_true;
  std::optional<std::string> on_false;
  std::optional<std::vector<Command>> commands;
  std::optional<std::string> agent;
  Bindings step_variables;
  nlohmann::json extensions = nlohmann::json::object();

  /// Outgoing edges in declaration order.
  std::vector<std::string> successors() const;

  bool operator==(const WorkflowStep&) const = default;
};

struct AgentTarget {
  std::string id;
  std::string type;
  std::string name;
  std::string address;
  nlohmann::json extensions = nlohmann::json::object();

  bool operator==(const AgentTarget&) const = default;
};

struct Playbook {
  std::string id;
  std::string name;
  std::string description;
  Bindings playbook_variables;
  std::string workflow_start;
  std::map<std::string, WorkflowStep> workflow;
  std::map<std::string, AgentTarget> agent_definitions;
  /// Top-level keys outside the supported subset, kept verbatim.
  nlohmann::json extensions = nlohmann::json::object();

  const WorkflowStep* find_step(std::string_view id) const;

  bool operator==(const Playbook&) const = default;
};

enum class Severity { error, warning };

enum class FindingCode {
  missing_field,
  field_not_allowed,
  dangling_reference,
  bad_start,
  duplicate_branch,
  bad_command,
  bad_variable,
  bad_condition,
  unknown_agent,
  cycle,
  no_reachable_end,
  parallel_no_join,
  unreachable_step,
  syntax_error,          ///< document is not JSON
  schema_violation,      ///< rejected while parsing
  unsupported_construct, ///< outside the supported subset
};

struct Finding {
  Severity severity = Severity::error;
  FindingCode code = FindingCode::missing_field;
  std::string where;  ///< step id or field path
  std::string message;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Finding> findings;

  std::size_t error_count() const;
  std::string render() const;
};

class PlaybookError : public std::runtime_error {
 public:
  enum class Kind { syntax, schema, unsupported, io };
  PlaybookError(Kind kind, const std::string& message, std::vector<Finding> findings = {});
  Kind kind() const { return kind_; }
  /// Step-level findings behind a schema error, when there are any.
  const std::vector<Finding>& findings() const { return findings_; }

 private:
  Kind kind_;
  std::vector<Finding> findings_;
};

/// Parses a playbook document. Throws PlaybookError for JSON syntax errors
/// (with line/column), schema errors (missing fields, kind/field mismatch,
/// dangling step references) and constructs outside the supported subset.
/// Graph-level problems (cycles, unreachable end, non-joining branches) are
/// left to validate().
Playbook parse_playbook(std::string_view text);
Playbook load_playbook(const std::filesystem::path& path);

ValidationReport validate(const Playbook& playbook);
/// Parses and validates; parse failures become a single error finding
/// instead of an exception.
ValidationReport validate_document(std::string_view text);

/// Deterministic, pretty-printed JSON with sorted keys.
std::string serialize(const Playbook& playbook);
nlohmann::json to_json(const Playbook& playbook);

bool is_variable_name(std::string_view name);
bool value_matches_type(VariableType type, std::string_view value);
/// Canonical spelling used for comparisons (integers without leading zeros,
/// normalized dotted quads). Returns nullopt when the value does not parse.
std::optional<std::string> normalize_value(VariableType type, std::string_view value);

/// Placeholders appearing in `text`, in order of first appearance.
std::vector<std::string> placeholders_in(std::string_view text);

class UnboundVariableError : public std::runtime_error {
 public:
  explicit UnboundVariableError(std::string placeholder);
  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

/// Replaces every `__name__` placeholder by its bound value in a single pass.
/// Throws UnboundVariableError when a placeholder has no bound value.
std::string substitute_variables(std::string_view text, const Bindings& bindings);

}  // namespace amiroar::cacao
