#include <benchmark/benchmark.h>

#include "abcast/bracha.hpp"
#include "abcast/checks.hpp"
#include "abcast/gossip_quorum.hpp"
#include "abcast/scenario.hpp"

using namespace abcast;

namespace {

harness::Scenario scenario(std::uint32_t n, BackendKind backend, int values) {
  harness::Scenario s;
  const std::uint32_t f = (n - 1) / 3;
  s.sim.params = Params{n, f, 2, 0, 6};
  s.sim.backend.kind = backend;
  s.sim.pre_gst_max_delay = 2;
  s.schedule = LeaderSchedule::round_robin(n);
  for (int i = 0; i < values; ++i) {
    s.injections.push_back({static_cast<Time>(i), NodeId{static_cast<std::uint32_t>(i) % n},
                            "v" + std::to_string(i)});
  }
  s.sim.horizon = 400;
  return s;
}

void BM_Simulate(benchmark::State& state, BackendKind backend) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const auto s = scenario(n, backend, 16);
  std::size_t events = 0;
  for (auto _ : state) {
    const Trace t = harness::run_scenario(s);
    events += t.events.size();
    benchmark::DoNotOptimize(t.events.data());
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events),
                                                  benchmark::Counter::kIsRate);
}
BENCHMARK_CAPTURE(BM_Simulate, bracha, BackendKind::bracha)->Arg(4)->Arg(7)->Arg(10)->Arg(16);
BENCHMARK_CAPTURE(BM_Simulate, gossip, BackendKind::gossip)->Arg(4)->Arg(7)->Arg(10);

void BM_AllChecks(benchmark::State& state) {
  const Trace t = harness::run_scenario(scenario(7, BackendKind::bracha, 16));
  for (auto _ : state) {
    auto reports = harness::run_checks({}, t);
    benchmark::DoNotOptimize(reports.data());
  }
  state.counters["events"] = static_cast<double>(t.events.size());
}
BENCHMARK(BM_AllChecks);

void BM_BrachaRbInstance(benchmark::State& state) {
  const Params p{4, 1, 1, 0, 3};
  const Proposal v{"value", std::nullopt, 0};
  for (auto _ : state) {
    bracha::RbState s;
    const bracha::Context c{p, NodeId{1}, NodeId{0}, 0};
    bracha::rb_step(s, BrachaMsg{BrachaMsg::Kind::initial, rb_key(0), NodeId{0}, v}, c);
    for (std::uint32_t i : {0u, 2u, 3u}) {
      bracha::rb_step(s, BrachaMsg{BrachaMsg::Kind::echo, rb_key(0), NodeId{i}, v}, c);
    }
    for (std::uint32_t i : {0u, 2u}) {
      benchmark::DoNotOptimize(
          bracha::rb_step(s, BrachaMsg{BrachaMsg::Kind::ready, rb_key(0), NodeId{i}, v}, c));
    }
  }
}
BENCHMARK(BM_BrachaRbInstance);

void BM_SignVerify(benchmark::State& state) {
  auto scheme = std::make_shared<gossip::SimSignatureScheme>(4, 1);
  const gossip::Signer signer(scheme, NodeId{1});
  const Proposal v{std::string(static_cast<std::size_t>(state.range(0)), 'x'), Round{3}, 9};
  for (auto _ : state) {
    const auto m = gossip::make_signed(SignedMsg::Kind::echo, rb_key(4), v, signer);
    benchmark::DoNotOptimize(gossip::verify(*scheme, m));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_SignVerify)->Arg(64)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
