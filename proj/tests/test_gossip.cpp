#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "abcast/encoding.hpp"
#include "abcast/gossip_quorum.hpp"

using namespace abcast;
using namespace abcast::gossip;

namespace {

const Params kParams{4, 1, 1, 0, 3};

Proposal prop(const std::string& v) { return Proposal{v, std::nullopt, 0}; }

struct Fixture {
  std::shared_ptr<SimSignatureScheme> scheme = std::make_shared<SimSignatureScheme>(4, 7);
  std::vector<Signer> signers;

  Fixture() {
    for (std::uint32_t i = 0; i < 4; ++i) signers.emplace_back(scheme, NodeId{i});
  }

  Context ctx(std::uint32_t self, bool digest_mode = false) const {
    return Context{kParams, NodeId{self}, NodeId{0}, 0, digest_mode, scheme.get(), &signers[self]};
  }

  SignedMsg echo(std::uint32_t from, const SignedMsg::Payload& p) const {
    return make_signed(SignedMsg::Kind::echo, rb_key(0), p, signers[from]);
  }
};

}  // namespace

TEST(Digest, DeterministicAndDistinctOverCorpus) {
  const std::vector<std::string> corpus = {"", "a", "b", "ab", "ba", "p0", "p1", "q0",
                                           std::string(1000, 'x'), std::string(1001, 'x')};
  std::set<Digest> seen;
  for (const auto& v : corpus) {
    EXPECT_EQ(digest(prop(v)), digest(prop(v)));
    seen.insert(digest(prop(v)));
  }
  EXPECT_EQ(seen.size(), corpus.size());
  EXPECT_EQ(to_hex(digest(std::string_view{})),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Signatures, VerifyAndRejectTampering) {
  Fixture fx;
  auto m = fx.echo(1, prop("v"));
  EXPECT_TRUE(verify(*fx.scheme, m));
  auto other_payload = m;
  other_payload.payload = prop("w");
  EXPECT_FALSE(verify(*fx.scheme, other_payload));
  auto other_signer = m;
  other_signer.signer = NodeId{2};
  EXPECT_FALSE(verify(*fx.scheme, other_signer));
}

TEST(Signatures, SchemesWithDifferentSeedsDisagree) {
  auto a = std::make_shared<SimSignatureScheme>(4, 1);
  SimSignatureScheme b(4, 2);
  const auto m = make_signed(SignedMsg::Kind::vote, wba_key(0), Bit::one, Signer(a, NodeId{0}));
  EXPECT_TRUE(verify(*a, m));
  EXPECT_FALSE(verify(b, m));
}

TEST(KeyRing, RefusesSignerForCorrectNode) {
  auto scheme = std::make_shared<SimSignatureScheme>(4, 3);
  KeyRing ring(scheme, {NodeId{2}, NodeId{3}});
  EXPECT_FALSE(ring.adversary_signer(NodeId{3}, NodeId{0}).has_value());
  EXPECT_EQ(ring.refused(), 1u);
  const auto s = ring.adversary_signer(NodeId{3}, NodeId{2});
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->owner(), NodeId{2});
}

TEST(GossipRb, ProposerInputGossipsInitialThenEcho) {
  Fixture fx;
  RbState s;
  const auto step = grb_step(s, LocalInput{prop("v")}, fx.ctx(0));
  ASSERT_EQ(step.gossip.size(), 2u);
  EXPECT_EQ(step.gossip[0].kind, SignedMsg::Kind::initial);
  EXPECT_EQ(step.gossip[1].kind, SignedMsg::Kind::echo);
  EXPECT_TRUE(verify(*fx.scheme, step.gossip[0]));
}

TEST(GossipRb, ThirdEchoOutputs) {
  Fixture fx;
  RbState s;
  EXPECT_FALSE(grb_step(s, fx.echo(1, prop("v")), fx.ctx(3)).output);
  EXPECT_FALSE(grb_step(s, fx.echo(2, prop("v")), fx.ctx(3)).output);
  const auto step = grb_step(s, fx.echo(0, prop("v")), fx.ctx(3));
  ASSERT_TRUE(step.output);
  EXPECT_EQ(std::get<Proposal>(*step.output), prop("v"));
}

TEST(GossipRb, BadSignatureIsDroppedAndCounted) {
  Fixture fx;
  RbState s;
  auto m = fx.echo(1, prop("v"));
  m.sig.mac[0] ^= 1;
  const auto step = grb_step(s, m, fx.ctx(3));
  EXPECT_TRUE(step.dropped);
  EXPECT_TRUE(step.bad_signature);
  EXPECT_TRUE(s.echoes.empty());
}

TEST(GossipRb, InitialSignedByNonProposerIsDropped) {
  Fixture fx;
  RbState s;
  const auto m = make_signed(SignedMsg::Kind::initial, rb_key(0), prop("v"), fx.signers[2]);
  EXPECT_TRUE(grb_step(s, m, fx.ctx(1)).dropped);
  EXPECT_FALSE(s.first_initial);
}

TEST(GossipRb, DigestModeWaitsForInitial) {
  Fixture fx;
  RbState s;
  const Digest h = digest(prop("v"));
  for (std::uint32_t from : {0u, 1u, 2u}) {
    EXPECT_FALSE(grb_step(s, fx.echo(from, h), fx.ctx(3, true)).output);
  }
  const auto initial = make_signed(SignedMsg::Kind::initial, rb_key(0), prop("v"), fx.signers[0]);
  const auto step = grb_step(s, initial, fx.ctx(3, true));
  ASSERT_TRUE(step.output);
  EXPECT_EQ(std::get<Proposal>(*step.output), prop("v"));
  ASSERT_EQ(step.gossip.size(), 1u);
  EXPECT_EQ(std::get<Digest>(step.gossip[0].payload), h);
}

TEST(GossipRb, DigestModeRejectsPlainEcho) {
  Fixture fx;
  RbState s;
  EXPECT_TRUE(grb_step(s, fx.echo(1, prop("v")), fx.ctx(3, true)).dropped);
}

TEST(GossipRb, ConflictingEchoesCountAsEquivocationAndBothCount) {
  Fixture fx;
  RbState s;
  grb_step(s, fx.echo(2, prop("a")), fx.ctx(3));
  grb_step(s, fx.echo(2, prop("b")), fx.ctx(3));
  EXPECT_EQ(s.equivocations, 1u);
  EXPECT_EQ(s.echo_of.at(NodeId{2}), EchoKey{prop("a")});
  EXPECT_EQ(s.echoes.at(prop("a")).size(), 1u);
  EXPECT_EQ(s.echoes.at(prop("b")).size(), 1u);
}

TEST(GossipWba, QuorumOfVotesOutputs) {
  Fixture fx;
  WbaState s;
  auto vote = [&](std::uint32_t from, Bit b) {
    return make_signed(SignedMsg::Kind::vote, wba_key(0), b, fx.signers[from]);
  };
  const auto own = gwba_step(s, LocalInput{Bit::one}, fx.ctx(0));
  ASSERT_EQ(own.gossip.size(), 1u);
  EXPECT_FALSE(gwba_step(s, vote(1, Bit::zero), fx.ctx(0)).output);
  EXPECT_FALSE(gwba_step(s, vote(2, Bit::one), fx.ctx(0)).output);
  const auto step = gwba_step(s, vote(3, Bit::one), fx.ctx(0));
  ASSERT_TRUE(step.output);
  EXPECT_EQ(std::get<Bit>(*step.output), Bit::one);
}

TEST(GossipWba, SecondInputIsIgnored) {
  Fixture fx;
  WbaState s;
  gwba_step(s, LocalInput{Bit::one}, fx.ctx(1));
  EXPECT_TRUE(gwba_step(s, LocalInput{Bit::zero}, fx.ctx(1)).gossip.empty());
}

TEST(GossipBackend, ObserverWithoutSignerDoesNotVote) {
  auto scheme = std::make_shared<SimSignatureScheme>(5, 1);
  GossipBackend observer(kParams, LeaderSchedule::round_robin(4), NodeId{4}, false, scheme,
                         std::nullopt);
  EXPECT_TRUE(observer.input(wba_key(0), Bit::one).sends.empty());
}

TEST(GossipWba, TwoTwoSplitNeverDecidesInAnyOrder) {
  Fixture fx;
  std::vector<SignedMsg> votes;
  for (std::uint32_t i = 0; i < 4; ++i) {
    votes.push_back(make_signed(SignedMsg::Kind::vote, wba_key(0), i < 2 ? Bit::one : Bit::zero,
                                fx.signers[i]));
  }
  std::vector<int> order{0, 1, 2, 3};
  do {
    WbaState s;
    for (int k : order) EXPECT_FALSE(gwba_step(s, votes[k], fx.ctx(0)).output);
  } while (std::next_permutation(order.begin(), order.end()));
}
