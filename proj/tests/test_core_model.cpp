#include <gtest/gtest.h>

#include "abcast/core_model.hpp"
#include "abcast/encoding.hpp"
#include "abcast/subproto.hpp"

using namespace abcast;

TEST(Quorum, MinSizeExamples) {
  EXPECT_EQ(quorum_min_size(4, 1), 3u);
  EXPECT_EQ(quorum_min_size(7, 2), 5u);
  EXPECT_EQ(quorum_min_size(10, 3), 7u);
  EXPECT_EQ(quorum_min_size(5, 1), 4u);
  EXPECT_EQ(quorum_min_size(1, 0), 1u);
}

TEST(Quorum, IsQuorumThreshold) {
  const Params p{7, 2, 1, 0, 3};
  EXPECT_FALSE(is_quorum(4, p));
  EXPECT_TRUE(is_quorum(5, p));
  EXPECT_TRUE(is_quorum(7, p));
}

// Two quorums share more than f validators for every admissible (n, f).
TEST(Quorum, PairwiseIntersectionExceedsF) {
  for (std::uint32_t n = 1; n <= 40; ++n) {
    for (std::uint32_t f = 0; 3 * f < n; ++f) {
      const std::uint32_t q = quorum_min_size(n, f);
      EXPECT_GT(2 * q, n + f) << "n=" << n << " f=" << f;
      EXPECT_LE(q, n - f) << "n=" << n << " f=" << f;
    }
  }
}

TEST(Params, RejectsFaultBound) {
  EXPECT_THROW((Params{3, 1, 1, 0, 3}.validate()), FaultBoundError);
  EXPECT_THROW((Params{6, 2, 1, 0, 3}.validate()), FaultBoundError);
  EXPECT_NO_THROW((Params{4, 1, 1, 0, 3}.validate()));
}

TEST(Params, RejectsNonPositiveDelays) {
  EXPECT_THROW((Params{4, 1, 0, 0, 3}.validate()), ConfigError);
  EXPECT_THROW((Params{4, 1, 1, 0, 0}.validate()), ConfigError);
  EXPECT_THROW((Params{4, 1, 1, -1, 3}.validate()), ConfigError);
}

TEST(Params, RoundTimeoutIsTwiceSubprotoDelay) {
  EXPECT_EQ((Params{4, 1, 2, 0, 6}.round_timeout()), 12);
}

TEST(LeaderSchedule, RoundRobin) {
  const auto s = LeaderSchedule::round_robin(4);
  EXPECT_TRUE(s.is_round_robin());
  EXPECT_EQ(s.leader_of(0), NodeId{0});
  EXPECT_EQ(s.leader_of(5), NodeId{1});
  EXPECT_EQ(s.leader_of(4003), NodeId{3});
}

TEST(LeaderSchedule, RepeatingListMayRepeatLeaders) {
  const auto s = LeaderSchedule::repeating({NodeId{2}, NodeId{0}, NodeId{2}, NodeId{1}, NodeId{3}}, 4);
  EXPECT_FALSE(s.is_round_robin());
  EXPECT_EQ(s.leader_of(2), NodeId{2});
  EXPECT_EQ(s.leader_of(6), NodeId{0});
}

TEST(LeaderSchedule, RejectsMissingOrUnknownValidators) {
  EXPECT_THROW(LeaderSchedule::repeating({NodeId{0}, NodeId{1}, NodeId{2}}, 4), ConfigError);
  EXPECT_THROW(LeaderSchedule::repeating({NodeId{0}, NodeId{1}, NodeId{2}, NodeId{4}}, 4),
               ConfigError);
  EXPECT_THROW(LeaderSchedule::repeating({}, 4), ConfigError);
}

TEST(Encoding, EqualValuesEncodeEqually) {
  const Proposal a{"x", Round{3}, 7};
  const Proposal b{"x", Round{3}, 7};
  EXPECT_EQ(encode(a), encode(b));
  EXPECT_NE(encode(a), encode(Proposal{"x", std::nullopt, 7}));
  EXPECT_NE(encode(Proposal{"ab", std::nullopt, 0}), encode(Proposal{"a", std::nullopt, 0}));
}

TEST(Encoding, LengthPrefixPreventsConcatenationCollisions) {
  const Proposal a{"ab", Round{1}, 0};
  const Proposal b{std::string("a\0", 2), Round{1}, 0};
  EXPECT_NE(encode(a), encode(b));
}

TEST(InstanceTable, KindMatchesValue) {
  EXPECT_TRUE(kind_matches(InstanceKind::rb, Proposal{"v", std::nullopt, 0}));
  EXPECT_FALSE(kind_matches(InstanceKind::rb, Bit::one));
  EXPECT_TRUE(kind_matches(InstanceKind::wba, Bit::zero));
}
