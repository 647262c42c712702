#include "amiroar/cacao/playbook.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "amiroar/common/ipv4.hpp"

namespace amiroar::cacao {

namespace {

struct KindName {
  StepKind kind;
  std::string_view name;
};
constexpr KindName kStepKinds[] = {{StepKind::start, "start"},
                                   {StepKind::end, "end"},
                                   {StepKind::action, "action"},
                                   {StepKind::parallel, "parallel"},
                                   {StepKind::if_condition, "if-condition"}};

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '-';
}

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

}  // namespace

std::string_view to_string(StepKind k) {
  for (const auto& e : kStepKinds)
    if (e.kind == k) return e.name;
  return "?";
}

std::optional<StepKind> step_kind_from_string(std::string_view s) {
  for (const auto& e : kStepKinds)
    if (e.name == s) return e.kind;
  return std::nullopt;
}

std::string_view to_string(CommandKind k) {
  return k == CommandKind::http_api ? "http-api" : "manual";
}

std::optional<CommandKind> command_kind_from_string(std::string_view s) {
  if (s == "http-api") return CommandKind::http_api;
  if (s == "manual") return CommandKind::manual;
  return std::nullopt;
}

std::string_view to_string(VariableType t) {
  switch (t) {
    case VariableType::string: return "string";
    case VariableType::integer: return "integer";
    case VariableType::ipv4_addr: return "ipv4-addr";
  }
  return "?";
}

std::optional<VariableType> variable_type_from_string(std::string_view s) {
  if (s == "string") return VariableType::string;
  if (s == "integer") return VariableType::integer;
  if (s == "ipv4-addr") return VariableType::ipv4_addr;
  return std::nullopt;
}

std::string_view to_string(ConditionOp op) {
  switch (op) {
    case ConditionOp::equals: return "equals";
    case ConditionOp::not_equals: return "not-equals";
    case ConditionOp::in: return "in";
  }
  return "?";
}

std::optional<ConditionOp> condition_op_from_string(std::string_view s) {
  if (s == "equals") return ConditionOp::equals;
  if (s == "not-equals") return ConditionOp::not_equals;
  if (s == "in") return ConditionOp::in;
  return std::nullopt;
}

std::vector<std::string> WorkflowStep::successors() const {
  std::vector<std::string> out;
  if (on_completion) out.push_back(*on_completion);
  if (next_steps) out.insert(out.end(), next_steps->begin(), next_steps->end());
  if (on_true) out.push_back(*on_true);
  if (on_false) out.push_back(*on_false);
  return out;
}

const WorkflowStep* Playbook::find_step(std::string_view id) const {
  auto it = workflow.find(std::string(id));
  return it == workflow.end() ? nullptr : &it->second;
}

PlaybookError::PlaybookError(Kind kind, const std::string& message, std::vector<Finding> findings)
    : std::runtime_error(message), kind_(kind), findings_(std::move(findings)) {}

UnboundVariableError::UnboundVariableError(std::string placeholder)
    : std::runtime_error("unbound variable " + placeholder), placeholder_(std::move(placeholder)) {}

bool is_variable_name(std::string_view name) {
  if (name.size() < 5 || !name.starts_with("__") || !name.ends_with("__")) return false;
  auto inner = name.substr(2, name.size() - 4);
  if (!is_alnum(inner.front()) || !is_alnum(inner.back())) return false;
  if (inner.find("__") != std::string_view::npos) return false;
  return std::all_of(inner.begin(), inner.end(), is_name_char);
}

std::optional<std::string> normalize_value(VariableType type, std::string_view value) {
  switch (type) {
    case VariableType::string:
      return std::string(value);
    case VariableType::integer: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size())
        return std::nullopt;
      return std::to_string(v);
    }
    case VariableType::ipv4_addr: {
      auto ip = Ipv4Address::parse(value);
      if (!ip) return std::nullopt;
      return ip->to_string();
    }
  }
  return std::nullopt;
}

bool value_matches_type(VariableType type, std::string_view value) {
  return normalize_value(type, value).has_value();
}

namespace {

// Calls f(begin, end) for every placeholder occurrence.
template <typename F>
void scan_placeholders(std::string_view text, F&& f) {
  std::size_t i = 0;
  while (i + 1 < text.size()) {
    if (text[i] != '_' || text[i + 1] != '_') {
      ++i;
      continue;
    }
    auto close = text.find("__", i + 2);
    if (close == std::string_view::npos) return;
    if (is_variable_name(text.substr(i, close + 2 - i))) {
      f(i, close + 2);
      i = close + 2;
    } else {
      ++i;
    }
  }
}

}  // namespace

std::vector<std::string> placeholders_in(std::string_view text) {
  std::vector<std::string> out;
  scan_placeholders(text, [&](std::size_t b, std::size_t e) {
    std::string name(text.substr(b, e - b));
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
  });
  return out;
}

std::string substitute_variables(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t copied = 0;
  scan_placeholders(text, [&](std::size_t b, std::size_t e) {
    std::string name(text.substr(b, e - b));
    auto it = bindings.find(name);
    if (it == bindings.end() || !it->second.bound()) throw UnboundVariableError(name);
    out.append(text.substr(copied, b - copied));
    out.append(it->second.value);
    copied = e;
  });
  out.append(text.substr(copied));
  return out;
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& msg) {
  throw PlaybookError(PlaybookError::Kind::schema, msg);
}
[[noreturn]] void unsupported(const std::string& msg) {
  throw PlaybookError(PlaybookError::Kind::unsupported, "unsupported construct: " + msg);
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                        bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) schema_error(where + ": missing required field '" + key + "'");
    return {};
  }
  if (!it->is_string()) schema_error(where + "." + key + ": expected a string");
  return it->get<std::string>();
}

json extensions_of(const json& obj, std::initializer_list<std::string_view> known) {
  json ext = json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) ext[it.key()] = it.value();
  }
  return ext;
}

void merge_extensions(json& out, const json& ext) {
  for (auto it = ext.begin(); it != ext.end(); ++it) out[it.key()] = it.value();
}

Bindings parse_variables(const json& obj, const std::string& where) {
  if (!obj.is_object()) schema_error(where + ": expected an object");
  Bindings out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string vwhere = where + "." + it.key();
    const json& v = it.value();
    if (!v.is_object()) schema_error(vwhere + ": expected an object");
    Variable var;
    var.name = it.key();
    auto type_name = get_string(v, "type", vwhere, true);
    auto type = variable_type_from_string(type_name);
    if (!type) unsupported(vwhere + ": variable type '" + type_name + "'");
    var.type = *type;
    if (auto val = v.find("value"); val != v.end()) {
      if (val->is_string())
        var.value = val->get<std::string>();
      else if (val->is_number_integer() && var.type == VariableType::integer)
        var.value = std::to_string(val->get<std::int64_t>());
      else
        schema_error(vwhere + ".value: expected a string");
    }
    if (auto c = v.find("constant"); c != v.end()) {
      if (!c->is_boolean()) schema_error(vwhere + ".constant: expected a boolean");
      var.constant = c->get<bool>();
    }
    var.description = get_string(v, "description", vwhere, false);
    var.extensions = extensions_of(v, {"type", "value", "constant", "description"});
    out.emplace(var.name, std::move(var));
  }
  return out;
}

json variables_to_json(const Bindings& vars) {
  json out = json::object();
  for (const auto& [name, v] : vars) {
    json j = json::object();
    merge_extensions(j, v.extensions);
    j["type"] = to_string(v.type);
    j["value"] = v.value;
    j["constant"] = v.constant;
    if (!v.description.empty()) j["description"] = v.description;
    out[name] = std::move(j);
  }
  return out;
}

Command parse_command(const json& c, const std::string& where) {
  if (!c.is_object()) schema_error(where + ": expected an object");
  Command cmd;
  auto type_name = get_string(c, "type", where, true);
  auto kind = command_kind_from_string(type_name);
  if (!kind) unsupported(where + ": command type '" + type_name + "'");
  cmd.kind = *kind;
  cmd.method = get_string(c, "method", where, false);
  cmd.url = get_string(c, "url", where, false);
  cmd.body = get_string(c, "body", where, false);
  cmd.description = get_string(c, "description", where, false);
  if (auto h = c.find("headers"); h != c.end()) {
    if (!h->is_object()) schema_error(where + ".headers: expected an object");
    for (auto it = h->begin(); it != h->end(); ++it) {
      if (!it->is_string()) schema_error(where + ".headers." + it.key() + ": expected a string");
      cmd.headers[it.key()] = it->get<std::string>();
    }
  }
  if (auto t = c.find("timeout"); t != c.end()) {
    // milliseconds, as in CACAO
    if (!t->is_number_integer() || t->get<std::int64_t>() <= 0)
      schema_error(where + ".timeout: expected a positive integer (milliseconds)");
    cmd.timeout = Duration{t->get<std::int64_t>()};
  }
  cmd.extensions =
      extensions_of(c, {"type", "method", "url", "headers", "body", "timeout", "description"});
  return cmd;
}

json command_to_json(const Command& cmd) {
  json j = json::object();
  merge_extensions(j, cmd.extensions);
  j["type"] = to_string(cmd.kind);
  if (!cmd.method.empty()) j["method"] = cmd.method;
  if (!cmd.url.empty()) j["url"] = cmd.url;
  if (!cmd.headers.empty()) j["headers"] = cmd.headers;
  if (!cmd.body.empty()) j["body"] = cmd.body;
  if (!cmd.description.empty()) j["description"] = cmd.description;
  j["timeout"] = cmd.timeout.count();
  return j;
}

ConditionExpr parse_condition(const json& c, const std::string& where) {
  if (!c.is_object()) schema_error(where + ": expected an object");
  ConditionExpr expr;
  expr.lhs = get_string(c, "lhs", where, true);
  auto op_name = get_string(c, "operator", where, true);
  auto op = condition_op_from_string(op_name);
  if (!op) unsupported(where + ": condition operator '" + op_name + "'");
  expr.op = *op;
  auto rhs = c.find("rhs");
  if (rhs == c.end()) schema_error(where + ": missing required field 'rhs'");
  if (rhs->is_string()) {
    expr.rhs.push_back(rhs->get<std::string>());
  } else if (rhs->is_array()) {
    expr.rhs_is_set = true;
    for (const auto& v : *rhs) {
      if (!v.is_string()) schema_error(where + ".rhs: expected strings");
      expr.rhs.push_back(v.get<std::string>());
    }
  } else {
    schema_error(where + ".rhs: expected a string or an array of strings");
  }
  auto ext = extensions_of(c, {"lhs", "operator", "rhs"});
  if (!ext.empty()) schema_error(where + ": unexpected field '" + ext.begin().key() + "'");
  return expr;
}

json condition_to_json(const ConditionExpr& c) {
  json j = json::object();
  j["lhs"] = c.lhs;
  j["operator"] = to_string(c.op);
  if (c.rhs_is_set)
    j["rhs"] = c.rhs;
  else
    j["rhs"] = c.rhs.empty() ? std::string() : c.rhs.front();
  return j;
}

// Step keys from the full standard that the subset does not execute.
constexpr std::string_view kUnsupportedStepKeys[] = {
    "on_success", "on_failure", "in_args",  "out_args",    "delay",
    "timeout",    "targets",    "playbook_id", "switch",   "cases"};

WorkflowStep parse_step(const std::string& id, const json& s) {
  const std::string where = "workflow." + id;
  if (!s.is_object()) schema_error(where + ": expected an object");
  for (auto key : kUnsupportedStepKeys)
    if (s.contains(key)) unsupported(where + ": step field '" + std::string(key) + "'");

  WorkflowStep step;
  step.id = id;
  // "kind" is accepted as an alias of the CACAO "type" key.
  std::string kind_name;
  bool has_type = s.contains("type"), has_kind = s.contains("kind");
  if (!has_type && !has_kind) schema_error(where + ": missing required field 'type'");
  if (has_type) kind_name = get_string(s, "type", where, true);
  if (has_kind) {
    auto alias = get_string(s, "kind", where, true);
    if (has_type && alias != kind_name)
      schema_error(where + ": 'kind' and 'type' disagree");
    kind_name = alias;
  }
  auto kind = step_kind_from_string(kind_name);
  if (!kind) unsupported(where + ": step type '" + kind_name + "'");
  step.kind = *kind;
  step.name = get_string(s, "name", where, false);
  step.description = get_string(s, "description", where, false);

  if (s.contains("on_completion")) step.on_completion = get_string(s, "on_completion", where, true);
  if (s.contains("on_true")) step.on_true = get_string(s, "on_true", where, true);
  if (s.contains("on_false")) step.on_false = get_string(s, "on_false", where, true);
  if (s.contains("agent")) step.agent = get_string(s, "agent", where, true);
  if (auto n = s.find("next_steps"); n != s.end()) {
    if (!n->is_array()) schema_error(where + ".next_steps: expected an array");
    step.next_steps.emplace();
    for (const auto& v : *n) {
      if (!v.is_string()) schema_error(where + ".next_steps: expected step ids");
      step.next_steps->push_back(v.get<std::string>());
    }
  }
  if (auto c = s.find("condition"); c != s.end())
    step.condition = parse_condition(*c, where + ".condition");
  if (auto c = s.find("commands"); c != s.end()) {
    if (!c->is_array()) schema_error(where + ".commands: expected an array");
    step.commands.emplace();
    for (std::size_t i = 0; i < c->size(); ++i)
      step.commands->push_back(
          parse_command((*c)[i], where + ".commands[" + std::to_string(i) + "]"));
  }
  if (auto v = s.find("step_variables"); v != s.end())
    step.step_variables = parse_variables(*v, where + ".step_variables");
  step.extensions = extensions_of(
      s, {"type", "kind", "name", "description", "on_completion", "next_steps", "condition",
          "on_true", "on_false", "commands", "agent", "step_variables"});
  return step;
}

json step_to_json(const WorkflowStep& s) {
  json j = json::object();
  merge_extensions(j, s.extensions);
  j["type"] = to_string(s.kind);
  if (!s.name.empty()) j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  if (s.on_completion) j["on_completion"] = *s.on_completion;
  if (s.next_steps) j["next_steps"] = *s.next_steps;
  if (s.condition) j["condition"] = condition_to_json(*s.condition);
  if (s.on_true) j["on_true"] = *s.on_true;
  if (s.on_false) j["on_false"] = *s.on_false;
  if (s.commands) {
    j["commands"] = json::array();
    for (const auto& c : *s.commands) j["commands"].push_back(command_to_json(c));
  }
  if (s.agent) j["agent"] = *s.agent;
  if (!s.step_variables.empty()) j["step_variables"] = variables_to_json(s.step_variables);
  return j;
}

std::string syntax_message(std::string_view text, const json::parse_error& e) {
  // e.byte is 1-based and points one past the offending character.
  std::size_t pos = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < pos; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  std::ostringstream os;
  os << "syntax error at line " << line << ", column " << col << ": " << e.what();
  return os.str();
}

}  // namespace

std::vector<Finding> local_findings(const Playbook& p);

Playbook parse_playbook(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw PlaybookError(PlaybookError::Kind::syntax, syntax_message(text, e));
  }
  if (!doc.is_object()) schema_error("playbook: expected a JSON object");
  if (doc.contains("workflow_exception")) unsupported("playbook: 'workflow_exception'");

  Playbook p;
  p.id = get_string(doc, "id", "playbook", true);
  p.name = get_string(doc, "name", "playbook", true);
  p.description = get_string(doc, "description", "playbook", false);
  p.workflow_start = get_string(doc, "workflow_start", "playbook", true);
  if (auto v = doc.find("playbook_variables"); v != doc.end())
    p.playbook_variables = parse_variables(*v, "playbook_variables");

  auto wf = doc.find("workflow");
  if (wf == doc.end()) schema_error("playbook: missing required field 'workflow'");
  if (!wf->is_object() || wf->empty()) schema_error("workflow: expected a non-empty object");
  for (auto it = wf->begin(); it != wf->end(); ++it)
    p.workflow.emplace(it.key(), parse_step(it.key(), it.value()));

  if (auto a = doc.find("agent_definitions"); a != doc.end()) {
    if (!a->is_object()) schema_error("agent_definitions: expected an object");
    for (auto it = a->begin(); it != a->end(); ++it) {
      const std::string where = "agent_definitions." + it.key();
      if (!it->is_object()) schema_error(where + ": expected an object");
      AgentTarget t;
      t.id = it.key();
      t.type = get_string(*it, "type", where, true);
      t.name = get_string(*it, "name", where, false);
      t.address = get_string(*it, "address", where, false);
      t.extensions = extensions_of(*it, {"type", "name", "address"});
      p.agent_definitions.emplace(t.id, std::move(t));
    }
  }
  p.extensions = extensions_of(doc, {"id", "name", "description", "playbook_variables",
                                     "workflow_start", "workflow", "agent_definitions"});

  auto findings = local_findings(p);
  for (const auto& f : findings) {
    if (f.severity == Severity::error)
      throw PlaybookError(PlaybookError::Kind::schema, f.where + ": " + f.message, std::move(findings));
  }
  return p;
}

Playbook load_playbook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PlaybookError(PlaybookError::Kind::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_playbook(ss.str());
}

nlohmann::json to_json(const Playbook& p) {
  json j = json::object();
  merge_extensions(j, p.extensions);
  j["id"] = p.id;
  j["name"] = p.name;
  if (!p.description.empty()) j["description"] = p.description;
  if (!p.playbook_variables.empty()) j["playbook_variables"] = variables_to_json(p.playbook_variables);
  j["workflow_start"] = p.workflow_start;
  j["workflow"] = json::object();
  for (const auto& [id, s] : p.workflow) j["workflow"][id] = step_to_json(s);
  if (!p.agent_definitions.empty()) {
    json a = json::object();
    for (const auto& [id, t] : p.agent_definitions) {
      json tj = json::object();
      merge_extensions(tj, t.extensions);
      tj["type"] = t.type;
      if (!t.name.empty()) tj["name"] = t.name;
      if (!t.address.empty()) tj["address"] = t.address;
      a[id] = std::move(tj);
    }
    j["agent_definitions"] = std::move(a);
  }
  return j;
}

std::string serialize(const Playbook& p) { return to_json(p).dump(2) + "\n"; }

}  // namespace amiroar::cacao
