#include <gtest/gtest.h>

#include <sstream>
#include <tuple>

#include "support.hpp"

using namespace dbnet;
using namespace dbnet::test;

namespace {

struct S {
  std::string content;
  bool stable = true;
};

FlatLts make(const std::vector<S>& states, const std::vector<std::tuple<std::uint32_t, std::string, std::uint32_t>>& edges,
             bool truncated = false) {
  FlatLts l;
  for (const auto& s : states) {
    StateText t;
    if (!s.content.empty()) t.facts = {s.content};
    l.states.push_back(FlatState::of(t, s.stable));
    l.depth.push_back(0);
  }
  for (const auto& [from, label, to] : edges) l.edges.push_back({from, l.intern(label), to, UINT32_MAX});
  l.sort_edges();
  l.truncated = truncated;
  if (truncated) l.truncation = "state limit reached";
  return l;
}

const std::string eps = epsilon_label();

}  // namespace

TEST(WeakBisim, AnLtsIsBisimilarToItself) {
  auto net = shopping_cart(1, 1, "bounded:1");
  auto flat = flatten(build_lts(net, net.initial, net.policy, Limits{}), net);
  auto r = check_weak_bisim(flat, flat);
  EXPECT_TRUE(r.bisimilar) << r.reason;
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.verdict(), "bisimilar");
}

TEST(WeakBisim, SilentDetoursThroughTransientStatesAreInvisible) {
  auto a = make({{"x"}, {"y"}}, {{0, "l", 1}});
  auto b = make({{"x"}, {"x", false}, {"y"}}, {{0, eps, 1}, {1, "l", 2}});
  EXPECT_TRUE(check_weak_bisim(a, b).bisimilar);
  EXPECT_TRUE(check_weak_bisim(b, a).bisimilar);
}

TEST(WeakBisim, DifferentLabelsAreDistinguished) {
  auto a = make({{"x"}, {"y"}}, {{0, "l", 1}});
  auto b = make({{"x"}, {"x", false}, {"y"}}, {{0, eps, 1}, {1, "l2", 2}});
  auto r = check_weak_bisim(a, b);
  EXPECT_FALSE(r.bisimilar);
  EXPECT_TRUE(r.witness_label == "l" || r.witness_label == "l2") << r.witness_label;
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace.front().state_a, "x |");
  EXPECT_FALSE(check_weak_bisim(b, a).bisimilar);
}

TEST(WeakBisim, DifferentContentIsDistinguished) {
  auto a = make({{"x"}, {"y"}}, {{0, "l", 1}});
  auto b = make({{"x"}, {"z"}}, {{0, "l", 1}});
  EXPECT_FALSE(check_weak_bisim(a, b).bisimilar);
  auto c = make({{"w"}, {"y"}}, {{0, "l", 1}});
  EXPECT_FALSE(check_weak_bisim(a, c).bisimilar);
}

TEST(WeakBisim, BranchingMatters) {
  // a.(b + c) against a.b + a.c
  auto one = make({{"s"}, {"t"}, {"u"}, {"v"}}, {{0, "a", 1}, {1, "b", 2}, {1, "c", 3}});
  auto two = make({{"s"}, {"t"}, {"t"}, {"u"}, {"v"}}, {{0, "a", 1}, {0, "a", 2}, {1, "b", 3}, {2, "c", 4}});
  EXPECT_FALSE(check_weak_bisim(one, two).bisimilar);
  EXPECT_FALSE(check_weak_bisim(two, one).bisimilar);
}

TEST(WeakBisim, GivingUpSilentlyIsInvisible) {
  // a transient excursion that returns to where it started
  auto a = make({{"x"}, {"y"}}, {{0, "l", 1}});
  auto b = make({{"x"}, {"x", false}, {"y"}}, {{0, eps, 1}, {1, eps, 0}, {0, "l", 2}});
  EXPECT_TRUE(check_weak_bisim(a, b).bisimilar);
}

TEST(WeakBisim, SymmetricOnCorpusPairs) {
  auto net = shopping_cart(1, 1, "bounded:1");
  auto good = certify_translation(net, net.initial, net.policy, Limits{});
  auto bad = certify_translation(net, net.initial, net.policy, Limits{20000}, {Mutation{MutationKind::DropRevert, 0}});
  for (const auto* c : {&good, &bad}) {
    auto fa = flatten(c->dbnet_lts, net);
    auto fb = flatten(c->cpn_lts, c->translation);
    EXPECT_EQ(check_weak_bisim(fa, fb).bisimilar, check_weak_bisim(fb, fa).bisimilar);
  }
  EXPECT_TRUE(good.result.bisimilar) << good.result.reason;
  EXPECT_FALSE(bad.result.bisimilar);
  EXPECT_FALSE(bad.result.trace.empty());
  EXPECT_FALSE(bad.result.witness_label.empty());
}

TEST(WeakBisim, FlatteningIsIdempotent) {
  auto net = shopping_cart(1, 1, "bounded:1");
  auto c = certify_translation(net, net.initial, net.policy, Limits{});
  auto once = flatten(c.cpn_lts, c.translation);
  auto twice = flatten(once);
  ASSERT_EQ(once.states.size(), twice.states.size());
  for (std::size_t i = 0; i < once.states.size(); ++i) EXPECT_EQ(once.states[i], twice.states[i]);
  EXPECT_EQ(once.labels, twice.labels);
  EXPECT_EQ(once.edges.size(), twice.edges.size());
}

TEST(WeakBisim, NetWithoutTransitionsMatchesItsTranslation) {
  auto net = dbnet_of("relation R(a: int); place P : (int); initial { fact R(1); token P(2); }");
  auto c = certify_translation(net, net.initial, net.policy, Limits{});
  EXPECT_EQ(c.dbnet_lts.states.size(), 1u);
  EXPECT_EQ(c.cpn_lts.states.size(), 1u);
  EXPECT_TRUE(c.result.bisimilar) << c.result.reason;
}

TEST(WeakBisim, TruncatedInputsAreRefused) {
  auto a = make({{"x"}, {"y"}}, {{0, "l", 1}}, true);
  auto b = make({{"x"}, {"y"}}, {{0, "l", 1}});
  auto r = check_weak_bisim(a, b);
  EXPECT_FALSE(r.bisimilar);
  EXPECT_EQ(r.reason.rfind("refused", 0), 0u) << r.reason;
  EXPECT_EQ(check_weak_bisim(a, a).reason.rfind("refused", 0), 0u);
}

TEST(WeakBisim, PartialExplorationCanStillRefute) {
  auto whole = make({{"x"}, {"y"}}, {{0, "l", 1}});
  auto part = make({{"x"}, {"x", false}, {"q"}}, {{0, eps, 1}, {1, "m", 2}}, true);
  auto r = check_weak_bisim(whole, part);
  EXPECT_FALSE(r.bisimilar);
  EXPECT_EQ(r.reason.find("refused"), std::string::npos) << r.reason;
  EXPECT_EQ(r.witness_label, "m");
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace.back().state_b, "q |");

  std::ostringstream cex;
  write_counterexample(cex, r);
  EXPECT_NE(cex.str().find("LABEL m"), std::string::npos) << cex.str();
}
