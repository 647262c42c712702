#include <gtest/gtest.h>

#include "amiroar/engine/engine.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace amiroar;
using namespace amiroar::engine;
using namespace std::chrono_literals;

namespace {

cacao::Playbook corpus(const std::string& name) {
  return cacao::load_playbook(fixtures::test_data() / "corpus" / "valid" / (name + ".json"));
}

// Answers after a fixed virtual delay.
class DelayedConnector : public Connector {
 public:
  DelayedConnector(Duration delay, int status = 200) : delay_(delay), status_(status) {}
  std::string name() const override { return "delayed"; }
  void call(const HttpRequest& req, sim::VirtualClock& clock, Done done) override {
    calls.push_back(req);
    clock.schedule_after(delay_, [done, s = status_] { done(HttpResponse{s, "{\"ok\":true}"}); });
  }
  bool simulated_latency() const override { return false; }
  std::vector<HttpRequest> calls;

 private:
  Duration delay_;
  int status_;
};

struct Harness {
  sim::VirtualClock clock{fixtures::at("2023-07-15T11:33:00Z")};
  ConnectorRegistry registry;
  std::vector<HttpRequest> seen;

  Harness() {
    auto ok = [this](const HttpRequest& r) {
      seen.push_back(r);
      return HttpResponse{200, "{}"};
    };
    registry.add("https://a.local", std::make_shared<FunctionConnector>("a", ok));
    registry.add("https://sdn-switch.com:10443", std::make_shared<FunctionConnector>("sdn", ok));
    registry.add("https://chat.local", std::make_shared<FunctionConnector>("chat", ok));
    registry.add("manual:", std::make_shared<FunctionConnector>("manual", ok));
  }

  ExecutionContext ctx(std::uint64_t seed = 1) {
    ExecutionContext c;
    c.playbook_id = "test";
    c.clock = &clock;
    c.registry = &registry;
    c.seed = seed;
    return c;
  }
};

}  // namespace

TEST(Engine, ParallelBranchesJoinAfterTheSlowestBranch) {
  Harness h;
  auto p = corpus("parallel");
  auto t = execute(p, h.ctx());
  ASSERT_EQ(t.status, TraceStatus::succeeded) << t.error;
  const auto* x2 = t.find("action--x2");
  const auto* y = t.find("action--y");
  const auto* join = t.find("action--join");
  ASSERT_TRUE(x2 && y && join);
  EXPECT_GE(join->start_time, std::max(x2->end_time, y->end_time));
  // branches overlap in virtual time
  EXPECT_EQ(t.find("action--x")->start_time, y->start_time);
  EXPECT_TRUE(oracle::join_violations(p, t).empty());
  EXPECT_TRUE(oracle::causality_violations(p, t).empty());
}

TEST(Engine, ActionDurationsStayInLatencyBand) {
  Harness h;
  auto t = execute(corpus("parallel"), h.ctx(99));
  for (const auto& r : t.records) {
    if (r.kind != cacao::StepKind::action) continue;
    EXPECT_GE(r.duration(), 5s) << r.step_id;
    EXPECT_LE(r.duration(), 10s) << r.step_id;
  }
}

TEST(Engine, SameSeedSameTrace) {
  Harness a, b, c;
  auto p = corpus("parallel");
  auto ta = execute(p, a.ctx(7));
  auto tb = execute(p, b.ctx(7));
  auto tc = execute(p, c.ctx(8));
  EXPECT_EQ(ta, tb);
  EXPECT_EQ(to_json(ta).dump(), to_json(tb).dump());
  EXPECT_NE(to_json(ta).dump(), to_json(tc).dump());
}

TEST(Engine, ConditionTakesOneBranchAndMarksTheOtherSkipped) {
  Harness h;
  auto p = corpus("branching");
  auto ctx = h.ctx();
  ctx.bindings["__class__"] = cacao::Variable{"__class__", cacao::VariableType::string, "both"};
  auto t = execute(p, ctx);
  ASSERT_EQ(t.status, TraceStatus::succeeded) << t.error;
  ASSERT_TRUE(t.find("action--manual"));
  EXPECT_TRUE(t.find("action--manual")->executed());
  ASSERT_TRUE(t.find("action--notify"));
  EXPECT_EQ(t.find("action--notify")->status, StepStatus::skipped);
  EXPECT_TRUE(oracle::exclusivity_violations(p, t).empty());
  // manual tasks are recorded and succeed at once
  EXPECT_EQ(t.find("action--manual")->duration(), Duration::zero());
  ASSERT_EQ(h.seen.size(), 1u);
  EXPECT_EQ(h.seen[0].url, kManualTaskUrl);

  Harness h2;
  auto ctx2 = h2.ctx();
  ctx2.bindings["__class__"] = cacao::Variable{"__class__", cacao::VariableType::string, "headend"};
  auto t2 = execute(p, ctx2);
  EXPECT_EQ(t2.find("action--manual")->status, StepStatus::skipped);
  ASSERT_EQ(h2.seen.size(), 1u);
  EXPECT_EQ(h2.seen[0].body, "{\"text\":\"sev 7\"}");
  EXPECT_TRUE(oracle::exclusivity_violations(p, t2).empty());
}

TEST(Engine, UnboundConditionFailsTheRun) {
  Harness h;
  auto t = execute(corpus("branching"), h.ctx());
  EXPECT_EQ(t.status, TraceStatus::failed);
  EXPECT_NE(t.error.find("__class__"), std::string::npos);
}

TEST(Engine, TimeoutFailsAtExactlyTheTimeoutInstant) {
  Harness h;
  auto slow = std::make_shared<DelayedConnector>(60s);
  h.registry.add("https://sdn-switch.com:10443", slow);
  auto ctx = h.ctx();
  ctx.latency = {Duration::zero(), Duration::zero()};
  const auto t0 = h.clock.now();
  auto t = execute(corpus("minimal"), ctx);
  EXPECT_EQ(t.status, TraceStatus::failed);
  const auto* r = t.find("action--flow");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, StepStatus::failed);
  EXPECT_EQ(r->end_time, t0 + 30s);
  EXPECT_EQ(r->outputs["commands"][0]["error"], "timeout after 30000 ms");
  EXPECT_FALSE(t.find("end--a"));
}

TEST(Engine, ResponseAtTheTimeoutInstantLoses) {
  Harness h;
  h.registry.add("https://sdn-switch.com:10443", std::make_shared<DelayedConnector>(30s));
  auto ctx = h.ctx();
  ctx.latency = {Duration::zero(), Duration::zero()};
  EXPECT_EQ(execute(corpus("minimal"), ctx).status, TraceStatus::failed);

  Harness h2;
  h2.registry.add("https://sdn-switch.com:10443", std::make_shared<DelayedConnector>(29999ms));
  auto ctx2 = h2.ctx();
  ctx2.latency = {Duration::zero(), Duration::zero()};
  EXPECT_EQ(execute(corpus("minimal"), ctx2).status, TraceStatus::succeeded);
}

TEST(Engine, FailedBranchAbortsAtTheJoin) {
  Harness h;
  h.registry.add("https://a.local/y", std::make_shared<DelayedConnector>(1s, 500));
  auto t = execute(corpus("parallel"), h.ctx());
  EXPECT_EQ(t.status, TraceStatus::failed);
  EXPECT_EQ(t.find("action--y")->status, StepStatus::failed);
  EXPECT_TRUE(t.find("action--x2")) << "sibling branch still completes";
  EXPECT_FALSE(t.find("action--join"));
  EXPECT_NE(t.error.find("HTTP 500"), std::string::npos);
}

TEST(Engine, UnknownHostIsADispatchError) {
  sim::VirtualClock clock(fixtures::at("2023-07-15T11:33:00Z"));
  ConnectorRegistry empty;
  ExecutionContext ctx;
  ctx.clock = &clock;
  ctx.registry = &empty;
  auto t = execute(corpus("minimal"), ctx);
  EXPECT_EQ(t.status, TraceStatus::failed);
  EXPECT_NE(t.error.find("no connector registered"), std::string::npos);
}

TEST(Engine, InvalidPlaybookIsRefused) {
  Harness h;
  auto p = cacao::load_playbook(fixtures::test_data() / "corpus/invalid/cycle.json");
  EXPECT_THROW(execute(p, h.ctx()), EngineError);
}

TEST(Engine, RegistryPicksLongestPrefix) {
  ConnectorRegistry r;
  auto a = std::make_shared<FunctionConnector>("a", [](const HttpRequest&) { return HttpResponse{}; });
  auto b = std::make_shared<FunctionConnector>("b", [](const HttpRequest&) { return HttpResponse{}; });
  r.add("https://h.local", a);
  r.add("https://h.local/api/special", b);
  EXPECT_EQ(r.resolve("https://h.local/api/x")->name(), "a");
  EXPECT_EQ(r.resolve("https://h.local/api/special/y")->name(), "b");
  EXPECT_EQ(r.resolve("https://other.local/"), nullptr);
}

TEST(Engine, ConditionOperators) {
  cacao::Bindings b;
  b["__c__"] = cacao::Variable{"__c__", cacao::VariableType::string, "meter"};
  b["__ip__"] = cacao::Variable{"__ip__", cacao::VariableType::ipv4_addr, "10.0.0.07"};
  using cacao::ConditionOp;
  EXPECT_TRUE(evaluate_condition({"__c__", ConditionOp::equals, {"meter"}}, b));
  EXPECT_FALSE(evaluate_condition({"__c__", ConditionOp::not_equals, {"meter"}}, b));
  EXPECT_TRUE(evaluate_condition({"__c__", ConditionOp::in, {"both", "meter"}, true}, b));
  EXPECT_FALSE(evaluate_condition({"__c__", ConditionOp::in, {"headend"}, true}, b));
  EXPECT_TRUE(evaluate_condition({"__ip__", ConditionOp::equals, {"10.0.0.7"}}, b));
  EXPECT_THROW(evaluate_condition({"__nope__", ConditionOp::equals, {"x"}}, b), cacao::UnboundVariableError);
}

TEST(Engine, RouterAndAlertBindings) {
  PlaybookRouter router;
  EXPECT_THROW(router.select("AMI-FDI-001"), NoPlaybookError);
  auto p = std::make_shared<const cacao::Playbook>(cacao::load_playbook(fixtures::playbook_path("fdi_response")));
  router.add("AMI-FDI-001", p);
  EXPECT_EQ(router.select("AMI-FDI-001"), p);

  ndr::Alert a;
  a.alert_id = "fdi-20230715T113400-10-0-0-7";
  a.signature_id = "AMI-FDI-001";
  a.device_class = ndr::DeviceClass::meter;
  a.victim_ip = a.offender_ip = a.suspect_meter_ip = "10.0.0.7";
  a.offender_ips = {"10.0.0.7"};
  a.detection_time = fixtures::at("2023-07-15T11:34:00Z");
  auto b = bindings_from_alert(a, p->id);
  EXPECT_EQ(b.at("__alert_id__").value, a.alert_id);
  EXPECT_EQ(b.at("__device_class__").value, "meter");
  EXPECT_EQ(b.at("__suspect_meter_ip__").value, "10.0.0.7");
  EXPECT_EQ(b.at("__offender_ips__").value, "10.0.0.7");
  EXPECT_FALSE(b.at("__case_id__").value.empty());
  EXPECT_FALSE(b.at("__sandbox_vlan__").value.empty());
}

TEST(Trace, JsonRoundTrip) {
  Harness h;
  auto t = execute(corpus("parallel"), h.ctx(3));
  auto back = trace_from_json(to_json(t));
  EXPECT_EQ(back, t);
  EXPECT_THROW(trace_from_json(nlohmann::json::object()), std::invalid_argument);
}
