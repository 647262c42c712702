#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

namespace oracle {

using amiroar::TimePoint;
namespace cacao = amiroar::cacao;
namespace engine = amiroar::engine;

namespace {

bool is_dotted_quad(const std::string& s) {
  static const std::regex re(R"(^(25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)(\.(25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)){3}$)");
  return std::regex_match(s, re);
}

std::string unescape(std::string_view v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '\\' && i + 1 < v.size()) {
      char n = v[++i];
      out.push_back(n == 'n' ? '\n' : n);
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

}  // namespace

std::optional<std::string> cef_violation(std::string_view line_view) {
  const std::string line(line_view);
  if (line.find('\n') != std::string::npos || line.find('\r') != std::string::npos)
    return "raw line break";
  static const std::string field = R"(((?:[^|\\]|\\[|\\])*))";
  static const std::regex header("^CEF:0\\|" + field + "\\|" + field + "\\|" + field + "\\|" + field + "\\|" +
                                 field + "\\|(10|[0-9])\\|(.*)$");
  std::smatch m;
  if (!std::regex_match(line, m, header)) return "header does not have 7 escaped fields and a 0..10 severity";
  for (int i = 1; i <= 5; ++i)
    if (m[i].length() == 0) return "empty header field " + std::to_string(i);
  const std::string ext = m[7];

  // Keys start at the beginning or after a space and end at an unescaped '='.
  std::vector<std::pair<std::size_t, std::size_t>> keys;  // key start, '=' position
  for (std::size_t i = 0; i < ext.size(); ++i) {
    if (ext[i] == '\\') {
      ++i;
      continue;
    }
    if (ext[i] != '=') continue;
    std::size_t b = i;
    while (b > 0 && ext[b - 1] != ' ') --b;
    const std::string key = ext.substr(b, i - b);
    static const std::regex key_re("^[A-Za-z][A-Za-z0-9_]*$");
    if (!std::regex_match(key, key_re)) return "unescaped '=' inside a value or bad key '" + key + "'";
    keys.emplace_back(b, i);
  }
  if (keys.empty() || keys.front().first != 0) return "extension does not start with a key";
  std::map<std::string, std::string> kv;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const auto [b, eq] = keys[k];
    const std::size_t end = k + 1 < keys.size() ? keys[k + 1].first - 1 : ext.size();
    const std::string key = ext.substr(b, eq - b);
    if (kv.count(key)) return "duplicate key " + key;
    kv[key] = unescape(std::string_view(ext).substr(eq + 1, end - eq - 1));
  }
  for (const char* k : {"src", "dst", "rt", "cnt", "cs1", "cs2"})
    if (!kv.count(k)) return std::string("missing key ") + k;
  for (const auto& [k, v] : kv) {
    static const std::regex cs("^cs([1-6])$");
    std::smatch cm;
    if (std::regex_match(k, cm, cs) && !kv.count(k + "Label")) return k + " without label";
  }
  if (!is_dotted_quad(kv["src"])) return "src is not an ipv4 address";
  if (!is_dotted_quad(kv["dst"])) return "dst is not an ipv4 address";
  static const std::regex digits("^[0-9]+$");
  if (!std::regex_match(kv["rt"], digits)) return "rt is not epoch milliseconds";
  if (!std::regex_match(kv["cnt"], digits)) return "cnt is not a count";
  const auto& dc = kv["cs1"];
  if (dc != "meter" && dc != "headend" && dc != "both") return "unknown device class " + dc;
  if (kv.count("cs5")) {
    std::stringstream ss(kv["cs5"]);
    std::string ip;
    while (std::getline(ss, ip, ','))
      if (!is_dotted_quad(ip)) return "offender list entry " + ip;
  }
  return std::nullopt;
}

MeanStd two_pass(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return r;
}

double expected_kva(const amiroar::sim::LoadModel& m, const amiroar::sim::SmartMeter& meter, TimePoint t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const auto jan1 = sys_days{ymd.year() / January / 1};
  const double doy = static_cast<double>((day - jan1).count() + 1) +
                     duration<double>(t - day).count() / 86400.0;
  const double lo = m.seasonal_min;
  const double hi = m.seasonal_max;
  const double seasonal = lo + (hi - lo) * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * (doy - m.seasonal_peak_day) / 365.25));
  return m.base_kva.at(meter.location_class) * std::pow(meter.area_m2 / 100.0, m.area_exponent) * seasonal;
}

std::map<std::string, TimePoint> phase_ends(const cacao::Playbook& p, const engine::ExecutionTrace& t) {
  std::map<std::string, TimePoint> out;
  for (const auto& r : t.records) {
    if (r.status == engine::StepStatus::skipped) continue;
    auto it = p.workflow.find(r.step_id);
    if (it == p.workflow.end()) continue;
    auto ph = it->second.extensions.find("x-ir-phase");
    if (ph == it->second.extensions.end()) continue;
    auto& slot = out[ph->get<std::string>()];
    if (r.end_time > slot) slot = r.end_time;
  }
  return out;
}

namespace {

std::vector<std::string> edges(const cacao::WorkflowStep& s) {
  std::vector<std::string> e;
  if (s.on_completion) e.push_back(*s.on_completion);
  if (s.next_steps) e.insert(e.end(), s.next_steps->begin(), s.next_steps->end());
  if (s.on_true) e.push_back(*s.on_true);
  if (s.on_false) e.push_back(*s.on_false);
  return e;
}

std::set<std::string> reach(const cacao::Playbook& p, const std::string& from) {
  std::set<std::string> seen;
  std::deque<std::string> q{from};
  while (!q.empty()) {
    auto id = q.front();
    q.pop_front();
    auto it = p.workflow.find(id);
    if (it == p.workflow.end() || !seen.insert(id).second) continue;
    for (const auto& n : edges(it->second)) q.push_back(n);
  }
  return seen;
}

std::vector<const engine::StepRecord*> executed(const engine::ExecutionTrace& t, const std::string& id) {
  std::vector<const engine::StepRecord*> out;
  for (const auto& r : t.records)
    if (r.step_id == id && r.status != engine::StepStatus::skipped) out.push_back(&r);
  return out;
}

}  // namespace

std::optional<std::string> join_of(const cacao::Playbook& p, const std::string& parallel_id) {
  auto it = p.workflow.find(parallel_id);
  if (it == p.workflow.end() || !it->second.next_steps || it->second.next_steps->empty()) return std::nullopt;
  std::optional<std::set<std::string>> common;
  for (const auto& h : *it->second.next_steps) {
    auto r = reach(p, h);
    if (!common) {
      common = r;
      continue;
    }
    std::set<std::string> keep;
    for (const auto& s : *common)
      if (r.count(s)) keep.insert(s);
    common = keep;
  }
  for (const auto& c : *common) {
    auto r = reach(p, c);
    bool dominates_rest = true;
    for (const auto& d : *common) dominates_rest = dominates_rest && r.count(d);
    if (dominates_rest) return c;
  }
  return std::nullopt;
}

std::vector<std::string> join_violations(const cacao::Playbook& p, const engine::ExecutionTrace& t) {
  std::vector<std::string> v;
  for (const auto& [id, step] : p.workflow) {
    if (step.kind != cacao::StepKind::parallel || executed(t, id).empty()) continue;
    auto join = join_of(p, id);
    if (!join) {
      v.push_back(id + ": no join");
      continue;
    }
    auto joins = executed(t, *join);
    if (joins.empty()) {
      if (t.status == engine::TraceStatus::succeeded) v.push_back(id + ": join " + *join + " never ran");
      continue;
    }
    const auto after_join = reach(p, *join);
    for (const auto& h : *step.next_steps) {
      for (const auto& s : reach(p, h)) {
        if (after_join.count(s)) continue;
        for (const auto* r : executed(t, s))
          if (r->end_time > joins.front()->start_time)
            v.push_back(id + ": branch step " + s + " ends after join " + *join + " starts");
      }
    }
  }
  return v;
}

std::vector<std::string> exclusivity_violations(const cacao::Playbook& p, const engine::ExecutionTrace& t) {
  std::vector<std::string> v;
  for (const auto& [id, step] : p.workflow) {
    if (step.kind != cacao::StepKind::if_condition || executed(t, id).empty()) continue;
    const bool yes = !executed(t, *step.on_true).empty();
    const bool no = !executed(t, *step.on_false).empty();
    if (yes == no) v.push_back(id + (yes ? ": both branches executed" : ": no branch executed"));
  }
  return v;
}

std::vector<std::string> causality_violations(const cacao::Playbook& p, const engine::ExecutionTrace& t) {
  std::vector<std::string> v;
  std::map<std::string, std::vector<std::string>> preds;
  for (const auto& [id, step] : p.workflow)
    for (const auto& n : edges(step)) preds[n].push_back(id);
  for (const auto& r : t.records) {
    if (r.status == engine::StepStatus::skipped) continue;
    if (r.end_time < r.start_time) v.push_back(r.step_id + ": ends before it starts");
    for (const auto& pr : preds[r.step_id])
      for (const auto* q : executed(t, pr))
        if (q->end_time > r.start_time) v.push_back(r.step_id + " starts before predecessor " + pr + " ends");
  }
  return v;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  if (!std::filesystem::exists(dir)) return out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).generic_string()] = read_file(e.path());
  return out;
}

}  // namespace oracle
