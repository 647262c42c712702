#include <gtest/gtest.h>

#include "amiroar/metrics/mttr.hpp"
#include "fixtures.hpp"

using namespace amiroar;
using namespace amiroar::metrics;
using namespace std::chrono_literals;

namespace {

const TimePoint kDetect = fixtures::at("2023-07-15T11:34:00Z");

engine::StepRecord rec(const std::string& id, const std::string& phase, Duration from, Duration to,
                       const std::string& connector = "sdn") {
  engine::StepRecord r;
  r.step_id = id;
  r.kind = cacao::StepKind::action;
  r.start_time = kDetect + from;
  r.end_time = kDetect + to;
  r.outputs["ir_phase"] = phase;
  r.outputs["connector"] = connector;
  r.outputs["commands"] = nlohmann::json::array({{{"connector", connector}}});
  return r;
}

engine::ExecutionTrace trace(const std::string& signature, Duration recovery_end) {
  engine::ExecutionTrace t;
  t.playbook_id = "p";
  t.alert_id = signature == "AMI-FDI-001" ? "fdi-1" : "ddos-1";
  t.signature_id = signature;
  t.detection_time = kDetect;
  t.status = engine::TraceStatus::succeeded;
  t.started = kDetect;
  t.records = {rec("a1", "identification", 0s, 7s), rec("a2", "containment", 7s, 14s),
               rec("a3", "eradication", 14s, 20s), rec("a4", "recovery", 20s, recovery_end),
               rec("a5", "reporting", recovery_end, recovery_end + 6s)};
  t.finished = kDetect + recovery_end + 6s;
  return t;
}

MttrRecord record(const std::string& kind, double seconds) {
  MttrRecord r;
  r.attack_kind = kind;
  r.detection_time = kDetect;
  r.recovery_time = kDetect + seconds_to_duration(seconds);
  return r;
}

double reduction_of(const std::vector<MttrRecord>& rs, Duration baseline) {
  BaselineModel b;
  b.manual_response_duration = baseline;
  return compare_baseline(rs, b).at(0).reduction;
}

}  // namespace

TEST(Mttr, RecoveryEndMinusDetection) {
  auto m = compute_mttr(trace("AMI-FDI-001", 1880s), "fdi_meter");
  EXPECT_EQ(m.attack_kind, "fdi");
  EXPECT_EQ(m.containment_time, kDetect + 14s);
  EXPECT_EQ(m.eradication_time, kDetect + 20s);
  EXPECT_DOUBLE_EQ(m.mttr_s(), 1880.0);
  EXPECT_EQ(attack_kind_of("AMI-DDOS-001"), "ddos");
  EXPECT_EQ(attack_kind_of("X-1"), "x-1");
}

TEST(Mttr, RejectsBrokenTraces) {
  auto failed = trace("AMI-FDI-001", 100s);
  failed.status = engine::TraceStatus::failed;
  EXPECT_THROW(compute_mttr(failed), std::invalid_argument);
  auto missing = trace("AMI-FDI-001", 100s);
  missing.records.erase(missing.records.begin() + 3);
  EXPECT_THROW(compute_mttr(missing), std::invalid_argument);
  auto swapped = trace("AMI-FDI-001", 100s);
  swapped.records[1].end_time = kDetect + 500s;  // containment ends after recovery
  EXPECT_THROW(compute_mttr(swapped), std::invalid_argument);
}

TEST(Baseline, ReductionArithmetic) {
  EXPECT_NEAR(reduction_of({record("fdi", 1880)}, 2h), 1.0 - 1880.0 / 7200.0, 1e-12);
  EXPECT_NEAR(reduction_of({record("fdi", 1880)}, 2h), 0.739, 1e-3);
  EXPECT_NEAR(reduction_of({record("fdi", 1880)}, 13h), 0.960, 1e-3);
  EXPECT_NEAR(reduction_of({record("ddos", 30)}, 2h), 0.9958, 1e-4);
  EXPECT_DOUBLE_EQ(reduction_of({record("fdi", 7200)}, 2h), 0.0);
  EXPECT_NEAR(reduction_of({record("fdi", 1000), record("fdi", 2000)}, 1h), 1.0 - 1500.0 / 3600.0, 1e-12);
}

TEST(Baseline, PerKindAndDescription) {
  BaselineModel b;
  b.manual_response_duration = 13h;
  b.description = "assumed manual response";
  auto rs = compare_baseline({record("fdi", 1880), record("ddos", 30)}, b);
  ASSERT_EQ(rs.size(), 2u);
  for (const auto& r : rs) {
    EXPECT_DOUBLE_EQ(r.baseline_s, 46800.0);
    const auto text = r.describe();
    EXPECT_NE(text.find("46800"), std::string::npos) << text;
    EXPECT_NE(text.find("assumed manual response"), std::string::npos) << text;
  }
  EXPECT_THROW(compare_baseline({}, b), std::invalid_argument);
  b.manual_response_duration = 0s;
  EXPECT_THROW(compare_baseline({record("fdi", 1)}, b), std::invalid_argument);
}

TEST(Band, FirmwareAndManualStepsAreExcluded) {
  auto t = trace("AMI-FDI-001", 1880s);
  t.records.push_back(rec("fw", "eradication", 20s, 1880s, "firmware"));
  auto manual = rec("m", "containment", 7s, 7s, "cases");
  manual.outputs["commands"][0]["manual"] = true;
  t.records.push_back(manual);
  auto skipped = rec("s", "containment", 7s, 7s);
  skipped.status = engine::StepStatus::skipped;
  t.records.push_back(skipped);

  EXPECT_FALSE(subject_to_band(t.records[5]));
  EXPECT_FALSE(subject_to_band(manual));
  EXPECT_FALSE(subject_to_band(skipped));
  EXPECT_TRUE(subject_to_band(t.records[0]));

  auto s = summarize({compute_mttr(t)}, {t});
  // a4 runs 1860 s, outside the band; the firmware step is not counted
  EXPECT_EQ(s.banded_steps, 5u);
  EXPECT_EQ(s.banded_in_band, 4u);
  EXPECT_FALSE(s.all_in_band());
  EXPECT_EQ(s.per_kind.at("fdi").count, 1u);
  EXPECT_FALSE(render_table({compute_mttr(t)}, s, {}).empty());
}
