#include "amiroar/engine/engine.hpp"

#include <random>

#include "amiroar/common/rng.hpp"

namespace amiroar::engine {

using cacao::Bindings;
using cacao::StepKind;
using cacao::WorkflowStep;
using nlohmann::json;

bool evaluate_condition(const cacao::ConditionExpr& c, const Bindings& bindings) {
  auto it = bindings.find(c.lhs);
  if (it == bindings.end() || !it->second.bound()) throw cacao::UnboundVariableError(c.lhs);
  const auto type = it->second.type;
  auto norm = [&](const std::string& v) { return cacao::normalize_value(type, v).value_or(v); };
  const std::string lhs = norm(it->second.value);
  switch (c.op) {
    case cacao::ConditionOp::equals:
      return !c.rhs.empty() && lhs == norm(c.rhs.front());
    case cacao::ConditionOp::not_equals:
      return c.rhs.empty() || lhs != norm(c.rhs.front());
    case cacao::ConditionOp::in:
      for (const auto& v : c.rhs)
        if (lhs == norm(v)) return true;
      return false;
  }
  return false;
}

Bindings effective_bindings(const cacao::Playbook& p, const WorkflowStep& step,
                            const Bindings& context) {
  Bindings out = p.playbook_variables;
  for (const auto& [name, v] : context) {
    auto it = out.find(name);
    if (it == out.end())
      out.emplace(name, v);
    else if (v.bound() && !it->second.constant)
      it->second.value = v.value;
  }
  for (const auto& [name, v] : step.step_variables) out[name] = v;
  return out;
}

namespace {

class Run : public std::enable_shared_from_this<Run> {
 public:
  using Arrive = std::function<void(bool)>;

  Run(std::shared_ptr<const cacao::Playbook> p, ExecutionContext ctx,
      std::function<void(ExecutionTrace)> on_done)
      : pb_(std::move(p)),
        joins_(cacao::parallel_joins(*pb_)),
        ctx_(std::move(ctx)),
        clock_(*ctx_.clock),
        rng_(mix_seed({ctx_.seed, fnv1a(ctx_.alert_id), fnv1a(pb_->id)})),
        on_done_(std::move(on_done)) {
    trace_.playbook_id = pb_->id;
    trace_.alert_id = ctx_.alert_id;
    trace_.signature_id = ctx_.signature_id;
    trace_.device_class = ctx_.device_class;
    trace_.detection_time = ctx_.detection_time;
  }

  void start() {
    trace_.started = clock_.now();
    auto self = shared_from_this();
    walk(pb_->workflow_start, std::nullopt, [self](bool ok) { self->finish(ok); });
  }

 private:
  void finish(bool ok) {
    trace_.finished = clock_.now();
    trace_.status = ok ? TraceStatus::succeeded : TraceStatus::failed;
    if (on_done_) on_done_(std::move(trace_));
  }

  std::size_t reserve(const WorkflowStep& s, StepStatus status = StepStatus::succeeded) {
    StepRecord r;
    r.seq = trace_.records.size();
    r.step_id = s.id;
    r.name = s.name;
    r.kind = s.kind;
    r.start_time = r.end_time = clock_.now();
    r.status = status;
    if (auto phase = s.extensions.find("x-ir-phase"); phase != s.extensions.end())
      r.outputs["ir_phase"] = *phase;
    trace_.records.push_back(std::move(r));
    return trace_.records.size() - 1;
  }

  void fail(const std::string& message) {
    if (trace_.error.empty()) trace_.error = message;
  }

  // Executes `id` and its continuation until `stop` (exclusive) is reached,
  // then calls `k` with whether everything on the way succeeded.
  void walk(const std::string& id, const std::optional<std::string>& stop, Arrive k) {
    if (stop && id == *stop) {
      k(true);
      return;
    }
    const WorkflowStep& s = pb_->workflow.at(id);
    switch (s.kind) {
      case StepKind::start:
        reserve(s);
        walk(*s.on_completion, stop, std::move(k));
        return;
      case StepKind::end:
        reserve(s);
        k(true);
        return;
      case StepKind::action:
        run_action(s, reserve(s), 0, stop, std::move(k));
        return;
      case StepKind::parallel:
        run_parallel(s, stop, std::move(k));
        return;
      case StepKind::if_condition:
        run_condition(s, stop, std::move(k));
        return;
    }
  }

  void run_parallel(const WorkflowStep& s, const std::optional<std::string>& stop, Arrive k) {
    auto rec = reserve(s);
    const std::string join = joins_.at(s.id);
    trace_.records[rec].outputs["join"] = join;
    struct Group {
      std::size_t remaining;
      bool ok = true;
    };
    auto group = std::make_shared<Group>(Group{s.next_steps->size()});
    auto self = shared_from_this();
    for (const auto& head : *s.next_steps) {
      walk(head, join, [self, group, join, stop, k](bool ok) {
        group->ok = group->ok && ok;
        if (--group->remaining > 0) return;
        if (!group->ok) {
          k(false);  // abort at the join
          return;
        }
        self->walk(join, stop, k);
      });
    }
  }

  void run_condition(const WorkflowStep& s, const std::optional<std::string>& stop, Arrive k) {
    auto rec = reserve(s);
    bool result = false;
    try {
      result = evaluate_condition(*s.condition, effective_bindings(*pb_, s, ctx_.bindings));
    } catch (const cacao::UnboundVariableError& e) {
      trace_.records[rec].status = StepStatus::failed;
      trace_.records[rec].outputs["error"] = e.what();
      fail(s.id + ": " + e.what());
      k(false);
      return;
    }
    const std::string& taken = result ? *s.on_true : *s.on_false;
    const std::string& untaken = result ? *s.on_false : *s.on_true;
    trace_.records[rec].outputs["result"] = result;
    trace_.records[rec].outputs["taken"] = taken;
    if (untaken != taken && !(stop && untaken == *stop))
      reserve(pb_->workflow.at(untaken), StepStatus::skipped);
    walk(taken, stop, std::move(k));
  }

  void run_action(const WorkflowStep& s, std::size_t rec, std::size_t index,
                  const std::optional<std::string>& stop, Arrive k) {
    if (index == s.commands->size()) {
      trace_.records[rec].end_time = clock_.now();
      walk(*s.on_completion, stop, std::move(k));
      return;
    }
    auto self = shared_from_this();
    dispatch(s, (*s.commands)[index], [self, &s, rec, index, stop, k](bool ok, json out) {
      auto& r = self->trace_.records[rec];
      if (out.contains("connector")) r.outputs["connector"] = out["connector"];
      r.outputs["commands"].push_back(std::move(out));
      if (!ok) {
        r.status = StepStatus::failed;
        r.end_time = self->clock_.now();
        self->fail(s.id + ": " + r.outputs["commands"].back().value("error", "command failed"));
        k(false);
        return;
      }
      self->run_action(s, rec, index + 1, stop, k);
    });
  }

  void dispatch(const WorkflowStep& s, const cacao::Command& cmd,
                std::function<void(bool, json)> done) {
    json out;
    HttpRequest req;
    try {
      auto vars = effective_bindings(*pb_, s, ctx_.bindings);
      if (cmd.kind == cacao::CommandKind::manual) {
        req.method = "POST";
        req.url = std::string(kManualTaskUrl);
        if (auto c = vars.find("__case_id__"); c != vars.end() && c->second.bound())
          req.headers["X-Case-Id"] = c->second.value;
        req.headers["X-Step-Id"] = s.id;
        out["manual"] = true;
      } else {
        req.method = cmd.method;
        req.url = cacao::substitute_variables(cmd.url, vars);
        for (const auto& [h, v] : cmd.headers) req.headers[h] = cacao::substitute_variables(v, vars);
      }
      req.body = cacao::substitute_variables(cmd.body, vars);
    } catch (const cacao::UnboundVariableError& e) {
      out["error"] = e.what();
      done(false, std::move(out));
      return;
    }
    out["method"] = req.method;
    out["url"] = req.url;
    Connector* connector = ctx_.registry ? ctx_.registry->resolve(req.url) : nullptr;
    if (!connector) {
      out["error"] = "no connector registered for " + req.url;
      done(false, std::move(out));
      return;
    }
    out["connector"] = connector->name();

    struct Pending {
      bool settled = false;
      sim::VirtualClock::EventId timer = 0;
    };
    auto pending = std::make_shared<Pending>();
    auto& clock = clock_;
    auto result = std::make_shared<json>(std::move(out));
    pending->timer = clock.schedule_after(cmd.timeout, [pending, result, done, timeout = cmd.timeout]() {
      if (pending->settled) return;
      pending->settled = true;
      (*result)["error"] = "timeout after " + std::to_string(timeout.count()) + " ms";
      done(false, std::move(*result));
    });
    auto on_response = [pending, result, done, &clock](HttpResponse resp) {
      if (pending->settled) return;
      pending->settled = true;
      clock.cancel(pending->timer);
      (*result)["status"] = resp.status;
      auto body = json::parse(resp.body, nullptr, false);
      (*result)["response"] = body.is_discarded() ? json(resp.body) : body;
      if (!resp.ok()) (*result)["error"] = "HTTP " + std::to_string(resp.status);
      done(resp.ok(), std::move(*result));
    };
    auto invoke = [pending, connector, req, on_response, &clock]() {
      if (pending->settled) return;
      connector->call(req, clock, on_response);
    };
    // Manual tasks are recorded and succeed at once; every automated call
    // takes a simulated 5-10 s unless the connector models its own timing.
    if (cmd.kind == cacao::CommandKind::http_api && connector->simulated_latency()) {
      std::uniform_int_distribution<std::int64_t> dist(ctx_.latency.min.count(),
                                                       ctx_.latency.max.count());
      clock.schedule_after(Duration{dist(rng_)}, invoke);
    } else {
      invoke();
    }
  }

  std::shared_ptr<const cacao::Playbook> pb_;
  std::map<std::string, std::string> joins_;
  ExecutionContext ctx_;
  sim::VirtualClock& clock_;
  std::mt19937_64 rng_;
  std::function<void(ExecutionTrace)> on_done_;
  ExecutionTrace trace_;
};

}  // namespace

void launch(std::shared_ptr<const cacao::Playbook> p, ExecutionContext ctx,
            std::function<void(ExecutionTrace)> on_done) {
  if (!ctx.clock) throw EngineError("execution context has no clock");
  auto report = cacao::validate(*p);
  if (!report.valid) throw EngineError("playbook " + p->id + " is invalid:\n" + report.render());
  if (ctx.latency.min > ctx.latency.max || ctx.latency.min < Duration::zero())
    throw EngineError("bad latency model");
  std::make_shared<Run>(std::move(p), std::move(ctx), std::move(on_done))->start();
}

ExecutionTrace execute(const cacao::Playbook& p, ExecutionContext ctx) {
  auto& clock = *ctx.clock;
  std::optional<ExecutionTrace> result;
  launch(std::make_shared<const cacao::Playbook>(p), std::move(ctx),
         [&result](ExecutionTrace t) { result = std::move(t); });
  if (!clock.run_while_pending([&] { return result.has_value(); }))
    throw EngineError("playbook " + p.id + " stalled with no pending events");
  return std::move(*result);
}

void PlaybookRouter::add(std::string signature_id, std::shared_ptr<const cacao::Playbook> playbook) {
  routes_[std::move(signature_id)] = std::move(playbook);
}

std::shared_ptr<const cacao::Playbook> PlaybookRouter::select(std::string_view signature_id) const {
  auto it = routes_.find(signature_id);
  if (it == routes_.end())
    throw NoPlaybookError("no playbook registered for signature " + std::string(signature_id));
  return it->second;
}

Bindings bindings_from_alert(const ndr::Alert& a, const std::string& playbook_id) {
  Bindings b;
  auto put = [&](const std::string& name, cacao::VariableType type, std::string value) {
    cacao::Variable v;
    v.name = name;
    v.type = type;
    v.value = std::move(value);
    b[name] = std::move(v);
  };
  using T = cacao::VariableType;
  put("__alert_id__", T::string, a.alert_id);
  put("__case_id__", T::string, "case-" + a.alert_id);
  put("__sandbox_vlan__", T::string, "sandbox-" + a.alert_id);
  put("__victim_ip__", T::ipv4_addr, a.victim_ip);
  put("__offender_ip__", T::ipv4_addr, a.offender_ip);
  put("__device_class__", T::string, std::string(ndr::to_string(a.device_class)));
  put("__signature_id__", T::string, a.signature_id);
  put("__playbook_id__", T::string, playbook_id);
  put("__detection_time__", T::string, format_iso8601(a.detection_time));
  put("__suspect_meter_ip__", T::ipv4_addr, a.suspect_meter_ip);
  put("__suspect_headend_ip__", T::ipv4_addr, a.suspect_headend_ip);
  std::string offenders;
  for (const auto& ip : a.offender_ips) offenders += (offenders.empty() ? "" : ",") + ip;
  put("__offender_ips__", T::string, offenders);
  return b;
}

ExecutionContext context_for_alert(const ndr::Alert& alert, const cacao::Playbook& p,
                                   sim::VirtualClock& clock, const ConnectorRegistry& registry,
                                   LatencyModel latency, std::uint64_t seed) {
  ExecutionContext ctx;
  ctx.playbook_id = p.id;
  ctx.bindings = bindings_from_alert(alert, p.id);
  ctx.clock = &clock;
  ctx.registry = &registry;
  ctx.latency = latency;
  ctx.seed = seed;
  ctx.alert_id = alert.alert_id;
  ctx.signature_id = alert.signature_id;
  ctx.device_class = std::string(ndr::to_string(alert.device_class));
  ctx.detection_time = alert.detection_time;
  return ctx;
}

void launch_for_alert(const ndr::Alert& alert, const PlaybookRouter& router,
                      sim::VirtualClock& clock, const ConnectorRegistry& registry,
                      LatencyModel latency, std::uint64_t seed,
                      std::function<void(ExecutionTrace)> on_done) {
  auto p = router.select(alert.signature_id);
  launch(p, context_for_alert(alert, *p, clock, registry, latency, seed), std::move(on_done));
}

ExecutionTrace on_alert(const ndr::Alert& alert, const PlaybookRouter& router,
                        sim::VirtualClock& clock, const ConnectorRegistry& registry,
                        LatencyModel latency, std::uint64_t seed) {
  auto p = router.select(alert.signature_id);
  return execute(*p, context_for_alert(alert, *p, clock, registry, latency, seed));
}

}  // namespace amiroar::engine
