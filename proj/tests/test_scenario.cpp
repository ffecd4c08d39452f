#include <gtest/gtest.h>

#include "abcast/fuzz.hpp"
#include "abcast/scenario.hpp"

using namespace abcast;
using namespace abcast::harness;
using nlohmann::json;

namespace {

json minimal() {
  return json{{"version", 1},
              {"params", {{"n", 4}, {"f", 1}, {"delta", 1}, {"gst", 0}, {"Delta", 3}}},
              {"injections", json::array({{{"time", 0}, {"node", 0}, {"value", "a"}}})}};
}

void expect_config_error(const json& j, const std::string& fragment) {
  try {
    parse_scenario(j);
    ADD_FAILURE() << "no error for " << j.dump();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Scenario, MinimalParsesWithDefaults) {
  const auto s = parse_scenario(minimal());
  EXPECT_EQ(s.sim.params.quorum(), 3u);
  EXPECT_EQ(s.sim.backend.kind, BackendKind::bracha);
  EXPECT_TRUE(s.auto_horizon);
  EXPECT_EQ(s.sim.pre_gst_max_delay, 1);
  EXPECT_TRUE(s.schedule.is_round_robin());
  ASSERT_EQ(s.injections.size(), 1u);
  EXPECT_TRUE(s.checks.empty());
}

TEST(Scenario, FaultBoundViolationIsSpecificError) {
  auto j = minimal();
  j["params"]["n"] = 3;
  EXPECT_THROW(parse_scenario(j), FaultBoundError);
}

TEST(Scenario, UnknownKeysAreRejected) {
  auto j = minimal();
  j["extra"] = 1;
  expect_config_error(j, "unknown key");
  j = minimal();
  j["params"]["x"] = 1;
  expect_config_error(j, "unknown key");
}

TEST(Scenario, BadValuesAreRejected) {
  auto j = minimal();
  j["backend"] = {{"kind", "paxos"}};
  expect_config_error(j, "unknown kind");

  j = minimal();
  j["backend"] = {{"kind", "bracha"}, {"digest_mode", true}};
  expect_config_error(j, "digest_mode");

  j = minimal();
  j["schedule"] = {{"kind", "list"}, {"order", {0, 1, 2}}};
  expect_config_error(j, "every validator");

  j = minimal();
  j["injections"][0]["node"] = 9;
  expect_config_error(j, "does not exist");

  j = minimal();
  j["checks"] = {"safety", "bogus"};
  expect_config_error(j, "unknown check");

  j = minimal();
  j["adversaries"] = {{{"node", 3}, {"behaviors", {{{"kind", "teleport"}}}}}};
  expect_config_error(j, "unknown behavior");

  j = minimal();
  j["sim"] = {{"horizon", 0}};
  expect_config_error(j, "horizon");

  j = minimal();
  j["version"] = 99;
  expect_config_error(j, "version");
}

TEST(Scenario, AdversaryBehaviorsParse) {
  auto j = minimal();
  j["backend"] = {{"kind", "gossip"}, {"digest_mode", true}};
  j["adversaries"] = {{{"node", 3},
                       {"behaviors",
                        {{{"kind", "equivocating_proposer"}, {"partition_a", {0, 1}}},
                         {{"kind", "flip_voter"}, {"bits", {{"2", 1}}}},
                         {{"kind", "crash"}, {"at", 50}}}}}};
  const auto s = parse_scenario(j);
  ASSERT_EQ(s.sim.adversaries.size(), 1u);
  EXPECT_EQ(s.sim.adversaries[0].behaviors.size(), 3u);
  EXPECT_TRUE(s.sim.backend.digest_mode);
}

TEST(Scenario, WithSeedRedrawsGstInsideRange) {
  auto j = minimal();
  j["sim"] = {{"gst_range", {10, 20}}};
  const auto s = parse_scenario(j);
  std::set<Time> seen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = with_seed(s, seed);
    EXPECT_EQ(t.sim.seed, seed);
    EXPECT_GE(t.sim.params.gst, 10);
    EXPECT_LE(t.sim.params.gst, 20);
    seen.insert(t.sim.params.gst);
    EXPECT_EQ(with_seed(s, seed).sim.params.gst, t.sim.params.gst);
  }
  EXPECT_GT(seen.size(), 3u);
}

TEST(Scenario, CheckTraceRejectsForeignTrace) {
  const auto s = parse_scenario(minimal());
  Trace t = run_scenario(s);
  auto j = minimal();
  j["params"]["n"] = 7;
  j["params"]["f"] = 2;
  EXPECT_THROW(check_trace(t, parse_scenario(j)), ConfigError);
}

TEST(Fuzz, ResultsIndependentOfThreadCount) {
  auto j = minimal();
  j["sim"] = {{"gst_range", {0, 30}}, {"pre_gst_max_delay", 10}, {"delay_law", "uniform"}};
  j["adversaries"] = {{{"node", 3}, {"behaviors", {{{"kind", "equivocating_proposer"}, {"partition_a", {0}}}}}}};
  const auto s = parse_scenario(j);
  const auto one = fuzz(s, 0, 15, 1);
  const auto four = fuzz(s, 0, 15, 4);
  ASSERT_EQ(one.size(), 16u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].seed, i);
    EXPECT_EQ(one[i].gst, four[i].gst);
    EXPECT_TRUE(one[i].passed());
    ASSERT_EQ(one[i].reports.size(), four[i].reports.size());
    for (std::size_t k = 0; k < one[i].reports.size(); ++k) {
      EXPECT_EQ(to_json(one[i].reports[k]), to_json(four[i].reports[k]));
    }
  }
}
