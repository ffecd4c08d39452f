#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace abcast;
using namespace abcast::harness;
using namespace abcast::testing;

namespace {

Trace honest_trace(BackendKind backend = BackendKind::bracha) {
  auto s = base_scenario(4, 1, 1, 0, 3, backend);
  for (std::uint32_t i = 0; i < 4; ++i) inject(s, i, i, "v" + std::to_string(i));
  return run_scenario(s);
}

}  // namespace

TEST(TraceJsonl, RoundTripIsLossless) {
  for (auto backend : {BackendKind::bracha, BackendKind::gossip}) {
    const Trace t = honest_trace(backend);
    std::stringstream ss;
    write_jsonl(ss, t);
    const Trace back = read_jsonl(ss);
    EXPECT_EQ(back, t);
  }
}

TEST(TraceJsonl, RejectsGarbage) {
  std::stringstream ss("not json\n");
  EXPECT_ANY_THROW(read_jsonl(ss));
}

TEST(Bounds, LivenessFormula) {
  EXPECT_EQ(liveness_bound(10, 2, 1, 4, 3), 10 + 3 * (2 + 2 * 4 + 1) * 3 + 2 * 3);
  EXPECT_EQ(liveness_bound(0, 0, 0, 4, 3), 3 * (0 + 2 * 4 + 1) * 3 + 6);
  EXPECT_EQ(liveness_bound(0, 0, 3, 4, 3), 3 * (0 + 4 * 4 + 1) * 3 + 6);
}

TEST(Bounds, BackendDelays) {
  TraceHeader h;
  h.params = Params{4, 1, 3, 0, 9};
  EXPECT_EQ(backend_rb_delay(h), 9);
  EXPECT_EQ(backend_wba_delay(h), 6);
  h.backend = BackendKind::gossip;
  EXPECT_EQ(backend_rb_delay(h), 6);
  EXPECT_EQ(backend_wba_delay(h), 3);
  h.gossip_relay_latency = 5;
  EXPECT_EQ(backend_rb_delay(h), 8);
  EXPECT_EQ(backend_wba_delay(h), 8);
}

TEST(Checks, HonestTracePassesEverything) {
  for (auto backend : {BackendKind::bracha, BackendKind::gossip}) {
    const auto reports = run_checks({}, honest_trace(backend));
    EXPECT_EQ(reports.size(), all_check_names().size());
    for (const auto& r : reports) EXPECT_EQ(r.status, Status::pass) << r.name << ": " << r.message;
  }
}

TEST(Checks, UnknownNameThrows) {
  EXPECT_THROW(run_check("nope", honest_trace()), ConfigError);
}

TEST(Checks, ShortHorizonMakesLivenessInconclusive) {
  auto s = base_scenario(4, 1, 1, 0, 3);
  inject(s, 0, 0, "x");
  set_horizon(s, 4);
  const auto r = check_liveness(run_scenario(s));
  EXPECT_EQ(r.status, Status::inconclusive);
  EXPECT_TRUE(all_passed({r}));
}

TEST(Checks, SafetyReportsFirstViolationIndex) {
  Trace t = honest_trace();
  std::uint64_t index = 0;
  for (auto& e : t.events) {
    if (e.kind == EventKind::ab_output && e.node == NodeId{2}) {
      e.payload = "tampered";
      index = e.index;
      break;
    }
  }
  const auto r = check_safety(t);
  ASSERT_EQ(r.status, Status::fail);
  ASSERT_TRUE(r.first_violation);
  EXPECT_GE(*r.first_violation, index);
}

TEST(Checks, ReportSerializesStatusAndMeasures) {
  const auto r = check_safety(honest_trace());
  const auto j = to_json(r);
  EXPECT_EQ(j.at("name"), "safety");
  EXPECT_EQ(j.at("status"), "pass");
  EXPECT_TRUE(j.at("measures").contains("outputs_max"));
}

TEST(Checks, DelayedSendBreaksDeliveryCheck) {
  Trace t = honest_trace();
  for (auto& e : t.events) {
    if (e.kind == EventKind::send) {
      *e.due += 1;
      break;
    }
  }
  EXPECT_EQ(check_delivery(t).status, Status::fail);
}
