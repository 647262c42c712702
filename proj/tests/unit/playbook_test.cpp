#include <gtest/gtest.h>

#include <algorithm>

#include "amiroar/cacao/graph.hpp"
#include "amiroar/cacao/playbook.hpp"
#include "fixtures.hpp"
#include "fuzz.hpp"
#include "oracles.hpp"

using namespace amiroar;
using namespace amiroar::cacao;

namespace {

std::vector<std::filesystem::path> corpus() {
  std::vector<std::filesystem::path> out;
  for (auto dir : {fixtures::source_dir() / "playbooks", fixtures::test_data() / "corpus" / "valid"})
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

bool has_code(const ValidationReport& r, FindingCode c) {
  return std::any_of(r.findings.begin(), r.findings.end(), [c](const Finding& f) { return f.code == c; });
}

ValidationReport validate_file(const std::string& name) {
  return validate_document(oracle::read_file(fixtures::test_data() / "corpus" / "invalid" / name));
}

}  // namespace

TEST(PlaybookCorpus, EveryDocumentValidates) {
  auto files = corpus();
  ASSERT_GE(files.size(), 5u);
  for (const auto& f : files) {
    auto r = validate(load_playbook(f));
    EXPECT_TRUE(r.valid) << f << "\n" << r.render();
  }
}

TEST(PlaybookCorpus, SerializeIsAFixedPoint) {
  for (const auto& f : corpus()) {
    const Playbook p = load_playbook(f);
    const std::string once = serialize(p);
    const Playbook back = parse_playbook(once);
    EXPECT_EQ(back, p) << f;
    EXPECT_EQ(serialize(back), once) << f;
  }
}

TEST(PlaybookCorpus, ExtensionsSurviveRoundTrip) {
  const Playbook p = load_playbook(fixtures::test_data() / "corpus/valid/branching.json");
  EXPECT_EQ(p.extensions.at("x-owner").at("team"), "grid-soc");
  EXPECT_EQ(p.extensions.at("spec_version"), "cacao-2.0");
  EXPECT_EQ(p.agent_definitions.at("soc-operator").extensions.at("x-shift"), "night");
  EXPECT_EQ(p.find_step("action--manual")->extensions.at("x-ir-phase"), "containment");
  auto j = nlohmann::json::parse(serialize(p));
  EXPECT_EQ(j["x-owner"]["tags"], nlohmann::json::array({"ami", "test"}));
  EXPECT_EQ(j["workflow"]["action--notify"]["commands"][0]["timeout"], 15000);
}

TEST(PlaybookParse, KindIsAnAliasOfType) {
  auto j = nlohmann::json::parse(oracle::read_file(fixtures::test_data() / "corpus/valid/minimal.json"));
  j["workflow"]["end--a"].erase("type");
  j["workflow"]["end--a"]["kind"] = "end";
  EXPECT_EQ(parse_playbook(j.dump()).find_step("end--a")->kind, StepKind::end);
}

TEST(PlaybookParse, UnsupportedConstructsAreRejected) {
  for (const char* key : {"on_success", "on_failure", "in_args", "out_args", "delay", "targets"}) {
    auto j = nlohmann::json::parse(oracle::read_file(fixtures::test_data() / "corpus/valid/minimal.json"));
    j["workflow"]["action--flow"][key] = "end--a";
    try {
      parse_playbook(j.dump());
      ADD_FAILURE() << key << " accepted";
    } catch (const PlaybookError& e) {
      EXPECT_EQ(e.kind(), PlaybookError::Kind::unsupported) << key;
    }
  }
  auto j = nlohmann::json::parse(oracle::read_file(fixtures::test_data() / "corpus/valid/minimal.json"));
  j["workflow_exception"] = "end--a";
  EXPECT_THROW(parse_playbook(j.dump()), PlaybookError);
}

TEST(PlaybookParse, SyntaxErrorsNameLineAndColumn) {
  try {
    parse_playbook("{\n  \"id\": \"x\",\n  oops\n}");
    FAIL();
  } catch (const PlaybookError& e) {
    EXPECT_EQ(e.kind(), PlaybookError::Kind::syntax);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(PlaybookParse, DanglingReferenceIsSchemaError) {
  try {
    load_playbook(fixtures::test_data() / "corpus/invalid/dangling.json");
    FAIL();
  } catch (const PlaybookError& e) {
    EXPECT_EQ(e.kind(), PlaybookError::Kind::schema);
  }
}

TEST(PlaybookValidate, InvalidCorpusHasExpectedFindings) {
  EXPECT_TRUE(has_code(validate_file("cycle.json"), FindingCode::cycle));
  EXPECT_TRUE(has_code(validate_file("no_join.json"), FindingCode::parallel_no_join));
  EXPECT_TRUE(has_code(validate_file("on_success.json"), FindingCode::unsupported_construct));
  EXPECT_TRUE(has_code(validate_file("syntax.json"), FindingCode::syntax_error));
  EXPECT_TRUE(has_code(validate_file("dangling.json"), FindingCode::schema_violation));
  EXPECT_TRUE(has_code(validate_file("undeclared.json"), FindingCode::bad_variable));
  for (auto name : {"cycle.json", "no_join.json", "on_success.json", "syntax.json", "dangling.json", "undeclared.json"})
    EXPECT_FALSE(validate_file(name).valid) << name;
}

TEST(PlaybookValidate, FuzzedInvalidDocumentsAllRejected) {
  auto valid = nlohmann::json::parse(oracle::read_file(fixtures::playbook_path("fdi_response")));
  ASSERT_TRUE(validate_document(valid.dump()).valid);
  auto mutants = oracle::invalid_mutants(valid, 100, 20230715);
  ASSERT_EQ(mutants.size(), 100u);
  std::set<std::string> kinds;
  for (const auto& m : mutants) {
    auto r = validate_document(m.text);
    EXPECT_FALSE(r.valid) << m.mutation;
    EXPECT_GT(r.error_count(), 0u) << m.mutation;
    EXPECT_FALSE(r.findings.empty()) << m.mutation;
    kinds.insert(m.mutation);
  }
  EXPECT_EQ(kinds.size(), oracle::mutation_kinds().size());
}

TEST(PlaybookGraph, TopologicalOrderAndCycleDetection) {
  auto p = load_playbook(fixtures::test_data() / "corpus/valid/parallel.json");
  auto order = topological_order(p);
  ASSERT_TRUE(order);
  auto pos = [&](const std::string& id) { return std::find(order->begin(), order->end(), id) - order->begin(); };
  EXPECT_LT(pos("action--x"), pos("action--x2"));
  EXPECT_LT(pos("action--x2"), pos("action--join"));
  EXPECT_LT(pos("action--y"), pos("action--join"));

  auto c = load_playbook(fixtures::test_data() / "corpus/invalid/cycle.json");
  std::string at;
  EXPECT_FALSE(topological_order(c, &at));
  EXPECT_TRUE(at == "action--x" || at == "action--x2") << at;
}

TEST(PlaybookGraph, JoinMatchesOracleOnCorpus) {
  for (const auto& f : corpus()) {
    auto p = load_playbook(f);
    for (const auto& [id, step] : p.workflow) {
      if (step.kind != StepKind::parallel) continue;
      EXPECT_EQ(join_of(p, step), oracle::join_of(p, id)) << f << " " << id;
    }
  }
  auto fdi = load_playbook(fixtures::playbook_path("fdi_response"));
  auto joins = parallel_joins(fdi);
  EXPECT_EQ(joins.at("parallel--triggered"), "if-condition--both");
  EXPECT_EQ(joins.at("parallel--both"), "parallel--close-out");
  EXPECT_EQ(joins.at("parallel--close-out"), "end--done");
}

TEST(Variables, TypesAndNormalization) {
  EXPECT_TRUE(is_variable_name("__victim_ip__"));
  EXPECT_FALSE(is_variable_name("victim_ip"));
  EXPECT_FALSE(is_variable_name("____"));
  EXPECT_EQ(normalize_value(VariableType::integer, "0042"), "42");
  EXPECT_FALSE(normalize_value(VariableType::integer, "4x"));
  EXPECT_EQ(normalize_value(VariableType::ipv4_addr, "10.0.0.07"), "10.0.0.7");
  EXPECT_FALSE(value_matches_type(VariableType::ipv4_addr, "10.0.0"));
  EXPECT_TRUE(value_matches_type(VariableType::string, ""));
}

TEST(Variables, SinglePassSubstitution) {
  Bindings b;
  b["__a__"] = Variable{"__a__", VariableType::string, "__b__"};
  b["__b__"] = Variable{"__b__", VariableType::string, "never"};
  b["__ip__"] = Variable{"__ip__", VariableType::ipv4_addr, "10.0.0.1"};
  // substituted values are not scanned again
  EXPECT_EQ(substitute_variables("x=__a__", b), "x=__b__");
  EXPECT_EQ(substitute_variables("{\"ipv4_src\":\"__ip__\"}", b), "{\"ipv4_src\":\"10.0.0.1\"}");
  EXPECT_EQ(substitute_variables("no placeholders", b), "no placeholders");
  EXPECT_EQ(placeholders_in("__a__ and __ip__ and __a__"), (std::vector<std::string>{"__a__", "__ip__"}));
}

TEST(Variables, UnboundPlaceholderThrows) {
  Bindings b;
  b["__empty__"] = Variable{"__empty__", VariableType::string, ""};
  try {
    substitute_variables("a __empty__ b", b);
    FAIL();
  } catch (const UnboundVariableError& e) {
    EXPECT_EQ(e.placeholder(), "__empty__");
  }
  EXPECT_THROW(substitute_variables("__missing__", b), UnboundVariableError);
}
