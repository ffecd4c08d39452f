#include <gtest/gtest.h>

#include "abcast/engine.hpp"

using namespace abcast;

namespace {

const Params kParams{4, 1, 1, 0, 3};

template <typename T>
std::vector<T> all_of_kind(const EngineActions& actions) {
  std::vector<T> out;
  for (const auto& a : actions) {
    if (const auto* x = std::get_if<T>(&a)) out.push_back(*x);
  }
  return out;
}

Engine make(std::uint32_t self, EngineOptions options = {}) {
  return Engine(kParams, LeaderSchedule::round_robin(4), NodeId{self}, std::move(options));
}

Proposal prop(const std::string& v, OptionalRound parent, Time ts = 0) { return {v, parent, ts}; }

}  // namespace

TEST(Engine, StartArmsTimerAndLeaderProposesWithBottomParent) {
  auto e = make(0);
  e.on_input("x");
  const auto actions = e.start(0);
  const auto timers = all_of_kind<action::RestartTimer>(actions);
  ASSERT_EQ(timers.size(), 1u);
  EXPECT_EQ(timers[0].delay, 6);
  const auto rb = all_of_kind<action::InputRb>(actions);
  ASSERT_EQ(rb.size(), 1u);
  EXPECT_EQ(rb[0].round, 0u);
  EXPECT_EQ(rb[0].proposal, prop("x", std::nullopt));
}

TEST(Engine, NonLeaderDoesNotPropose) {
  auto e = make(1);
  e.on_input("x");
  EXPECT_TRUE(all_of_kind<action::InputRb>(e.start(0)).empty());
}

TEST(Engine, TimeoutInputsZeroAndStaleGenerationsAreIgnored) {
  auto e = make(1);
  e.start(0);
  const auto gen = e.timer_generation();
  EXPECT_TRUE(e.on_timeout(gen + 1, 6).empty());
  const auto acts = e.on_timeout(gen, 6);
  ASSERT_EQ(acts.size(), 1u);
  EXPECT_EQ(std::get<action::InputWba>(acts[0]), (action::InputWba{0, Bit::zero}));
  EXPECT_TRUE(e.on_timeout(gen, 6).empty());
}

TEST(Engine, SkippableRoundAdvancesAndRestartsTimer) {
  auto e = make(1);
  e.start(0);
  const auto acts = e.on_subproto_output(wba_key(0), Bit::zero, 6);
  EXPECT_EQ(e.current(), 1u);
  EXPECT_TRUE(e.skippable(0));
  const auto timers = all_of_kind<action::RestartTimer>(acts);
  ASSERT_EQ(timers.size(), 1u);
  EXPECT_EQ(timers[0].generation, e.timer_generation());
}

TEST(Engine, LeaderAfterSkippedRoundsUsesBottomParent) {
  auto e = make(2);
  e.on_input("y");
  e.start(0);
  e.on_subproto_output(wba_key(0), Bit::zero, 6);
  const auto acts = e.on_subproto_output(wba_key(1), Bit::zero, 12);
  const auto rb = all_of_kind<action::InputRb>(acts);
  ASSERT_EQ(rb.size(), 1u);
  EXPECT_EQ(rb[0].round, 2u);
  EXPECT_EQ(rb[0].proposal.parent, std::nullopt);
}

TEST(Engine, AcceptedValueVotesOneAndCommitFinalizesChain) {
  auto e = make(3);
  e.start(0);
  auto acts = e.on_subproto_output(rb_key(0), prop("a", std::nullopt), 2);
  EXPECT_EQ(e.current(), 1u);
  ASSERT_EQ(all_of_kind<action::InputWba>(acts).size(), 1u);
  EXPECT_EQ(all_of_kind<action::InputWba>(acts)[0], (action::InputWba{0, Bit::one}));

  e.on_subproto_output(rb_key(1), prop("b", Round{0}), 3);
  EXPECT_EQ(e.current(), 2u);
  acts = e.on_subproto_output(wba_key(1), Bit::one, 5);
  const auto delivered = all_of_kind<action::Deliver>(acts);
  ASSERT_EQ(delivered.size(), 2u);
  EXPECT_EQ(delivered[0], (action::Deliver{0, "a"}));
  EXPECT_EQ(delivered[1], (action::Deliver{1, "b"}));
  EXPECT_EQ(e.undecided_round(), 2u);
}

TEST(Engine, CommitWaitsForAcceptance) {
  auto e = make(3);
  e.start(0);
  EXPECT_TRUE(all_of_kind<action::Deliver>(e.on_subproto_output(wba_key(1), Bit::one, 1)).empty());
  // Round 1 names round 0 as parent, which is not yet accepted.
  e.on_subproto_output(rb_key(1), prop("b", Round{0}), 2);
  EXPECT_FALSE(e.accepted(1));
  const auto acts = e.on_subproto_output(rb_key(0), prop("a", std::nullopt), 3);
  EXPECT_EQ(all_of_kind<action::Deliver>(acts).size(), 2u);
}

TEST(Engine, FertilityRequiresSkippableGap) {
  auto e = make(3);
  e.start(0);
  e.on_subproto_output(rb_key(0), prop("a", std::nullopt), 1);
  EXPECT_TRUE(e.fertile(1, Round{0}));
  EXPECT_FALSE(e.fertile(2, Round{0}));
  e.on_subproto_output(wba_key(1), Bit::zero, 2);
  EXPECT_TRUE(e.fertile(2, Round{0}));
  EXPECT_FALSE(e.fertile(2, std::nullopt));
  EXPECT_FALSE(e.fertile(0, Round{0}));
}

// A round can be skippable and still carry an accepted value that a later
// proposal builds on; finalizing the later round outputs it.
TEST(Engine, SkippableYetAcceptedValueIsFinalizedThroughChild) {
  auto e = make(3);
  e.start(0);
  e.on_subproto_output(wba_key(0), Bit::zero, 6);
  e.on_subproto_output(rb_key(0), prop("late", std::nullopt), 7);
  EXPECT_TRUE(e.skippable(0));
  EXPECT_TRUE(e.accepted(0));
  e.on_subproto_output(rb_key(1), prop("b", Round{0}), 8);
  const auto acts = e.on_subproto_output(wba_key(1), Bit::one, 9);
  const auto delivered = all_of_kind<action::Deliver>(acts);
  ASSERT_EQ(delivered.size(), 2u);
  EXPECT_EQ(delivered[0].value, "late");
}

TEST(Engine, DuplicateAncestorIsNotAccepted) {
  auto e = make(3);
  e.start(0);
  e.on_subproto_output(rb_key(0), prop("a", std::nullopt), 1);
  e.on_subproto_output(rb_key(1), prop("a", Round{0}), 2);
  EXPECT_TRUE(e.accepted(0));
  EXPECT_FALSE(e.accepted(1));
}

TEST(Engine, ConflictingOutputThrows) {
  auto e = make(3);
  e.start(0);
  e.on_subproto_output(wba_key(0), Bit::one, 1);
  EXPECT_TRUE(e.on_subproto_output(wba_key(0), Bit::one, 2).empty());
  EXPECT_THROW(e.on_subproto_output(wba_key(0), Bit::zero, 2), InternalError);
  EXPECT_THROW(e.on_subproto_output(rb_key(0), Bit::zero, 2), InternalError);
}

TEST(Engine, FifoAndLifoPickDifferentValues) {
  for (auto [queue, expect] : {std::pair{QueueDiscipline::fifo, "first"},
                               std::pair{QueueDiscipline::lifo, "second"}}) {
    EngineOptions o;
    o.queue = queue;
    auto e = make(0, o);
    e.on_input("first");
    e.on_input("second");
    const auto rb = all_of_kind<action::InputRb>(e.start(0));
    ASSERT_EQ(rb.size(), 1u);
    EXPECT_EQ(rb[0].proposal.value, expect);
  }
}

TEST(Engine, DeliveredValueIsNotQueuedAgain) {
  auto e = make(3);
  e.start(0);
  e.on_subproto_output(rb_key(0), prop("a", std::nullopt), 1);
  e.on_subproto_output(wba_key(0), Bit::one, 2);
  e.on_input("a");
  EXPECT_TRUE(e.inputs().empty());
}

TEST(Engine, StartTimeGateEmitsWakeup) {
  EngineOptions o;
  o.start_time = 10;
  auto e = make(0, o);
  e.on_input("x");
  const auto early = e.start(0);
  ASSERT_EQ(early.size(), 1u);
  EXPECT_EQ(std::get<action::Wakeup>(early[0]).at, 10);
  EXPECT_FALSE(e.started());
  const auto later = e.evaluate(10);
  EXPECT_TRUE(e.started());
  EXPECT_EQ(all_of_kind<action::InputRb>(later).size(), 1u);
}

TEST(Engine, MinParentDelayHoldsAdvance) {
  EngineOptions o;
  o.min_parent_delay = 5;
  auto e = make(3, o);
  e.start(0);
  const auto acts = e.on_subproto_output(rb_key(0), prop("a", std::nullopt, 2), 3);
  EXPECT_EQ(e.current(), 0u);
  const auto wake = all_of_kind<action::Wakeup>(acts);
  ASSERT_EQ(wake.size(), 1u);
  EXPECT_EQ(wake[0].at, 7);
  e.evaluate(7);
  EXPECT_EQ(e.current(), 1u);
}

TEST(Engine, RejectsZeroSpamWindow) {
  EngineOptions o;
  o.spam_window = 0;
  EXPECT_THROW(make(0, o), ConfigError);
}

TEST(Engine, CommitOfLaterRoundFinalizesUncommittedAncestor) {
  auto e = make(3);
  e.start(0);
  e.on_subproto_output(rb_key(0), prop("a", std::nullopt), 1);
  e.on_subproto_output(wba_key(1), Bit::zero, 2);
  e.on_subproto_output(rb_key(2), prop("b", Round{0}), 3);
  const auto delivered = all_of_kind<action::Deliver>(e.on_subproto_output(wba_key(2), Bit::one, 4));
  ASSERT_EQ(delivered.size(), 2u);
  EXPECT_EQ(delivered[0], (action::Deliver{0, "a"}));
  EXPECT_EQ(delivered[1], (action::Deliver{2, "b"}));
  EXPECT_EQ(e.undecided_round(), 3u);
}
