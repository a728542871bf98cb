#include <gtest/gtest.h>

#include "support.hpp"

using namespace dbnet;
using namespace dbnet::test;

namespace {

std::set<std::string> enabled_names(const NuCpn& net, const Marking& m) {
  std::set<std::string> out;
  for (const auto& [t, theta] : cpn_enabled(net, m, net.policy)) out.insert(t);
  return out;
}

}  // namespace

TEST(CpnPriority, HighShadowsLowAcrossTheWholeNet) {
  auto net = cpn_of(R"(
    place A : (int);
    place B : (int);
    place C : (int);
    transition Lo { in A(x); out C(x); priority low; }
    transition Mid { in A(x); out B(x); }
    transition Hi { in B(x); out C(x); priority high; }
    initial { token A(1); token B(2); }
  )");
  CpnEngine engine(net);
  EXPECT_EQ(engine.token_enabled(net.initial).size(), 3u);
  EXPECT_EQ(enabled_names(net, net.initial), (std::set<std::string>{"Hi"}));
  EXPECT_THROW(cpn_fire(net, net.initial, "Lo", {{"x", I(1)}}), ContractError);

  auto m = cpn_fire(net, net.initial, "Hi", {{"x", I(2)}});
  EXPECT_EQ(enabled_names(net, m), (std::set<std::string>{"Mid"}));
  m = cpn_fire(net, m, "Mid", {{"x", I(1)}});
  m = cpn_fire(net, m, "Hi", {{"x", I(1)}});
  EXPECT_TRUE(enabled_names(net, m).empty());
}

TEST(CpnReadArc, TestsWithoutConsuming) {
  auto text = std::string(R"(
    place R : (int);
    place P : (int);
    place Q : (int);
    transition T { in P(y); read R(x); out Q(x); }
    initial { token P(5); )");
  auto empty_r = cpn_of(text + "}");
  EXPECT_TRUE(enabled_names(empty_r, empty_r.initial).empty());

  auto net = cpn_of(text + "token R(7); }");
  auto m = cpn_fire(net, net.initial, "T", {{"x", I(7)}, {"y", I(5)}});
  EXPECT_EQ(marking_text(net, m).body(), "| Q(7) R(7)");
}

TEST(CpnLts, SingleTransitionGivesTwoStates) {
  auto net = cpn_of(R"(
    place P : (int);
    place Q : (int);
    transition T { in P(x); out Q(x); }
    initial { token P(1); }
  )");
  auto lts = cpn_build_lts(net, net.policy, Limits{});
  EXPECT_EQ(lts.states.size(), 2u);
  ASSERT_EQ(lts.edges.size(), 1u);
  EXPECT_EQ(lts.label(lts.edges[0].label), "T[x=1]");
}

TEST(CpnLts, OnlySilentTransitionsProduceEpsilonEdges) {
  auto text = std::string(R"(
    place P : (int);
    place Q : (int);
    transition T { in P(x); out Q(x); }
    transition U { in Q(x); out P(x); )");
  auto plain = cpn_build_lts(cpn_of(text + "} initial { token P(1); }"), FreshPolicy{}, Limits{});
  for (const auto& e : plain.edges) EXPECT_NE(e.label, 0u);

  auto quiet = cpn_build_lts(cpn_of(text + "silent; } initial { token P(1); }"), FreshPolicy{}, Limits{});
  std::size_t eps = 0;
  for (const auto& e : quiet.edges) eps += e.label == 0;
  EXPECT_EQ(eps, 1u);
}

TEST(CpnLabels, ObservedTransitionsReportSourceAndOutcome) {
  auto net = cpn_of(R"(
    place P : (int);
    transition T_commit { in P(x); observe T commit; }
    initial { token P(3); }
  )");
  auto lts = cpn_build_lts(net, net.policy, Limits{});
  ASSERT_EQ(lts.edges.size(), 1u);
  EXPECT_EQ(lts.label(lts.edges[0].label), "T[x=3]/commit");
}

TEST(CpnFresh, NuOutputsAvoidValuesInTheMarking) {
  auto net = cpn_of(R"(
    type id : string;
    place P : (id);
    transition Mint { in P(x); out P(x); out P(nu y); }
    initial { token P("id#1"); }
    policy { fresh bounded 2; }
  )");
  auto b = cpn_enabled(net, net.initial, net.policy);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].second.at("y"), Value::string("id#2", net.types.require("id")));
  auto lts = cpn_build_lts(net, net.policy, Limits{});
  EXPECT_EQ(lts.states.size(), 2u);  // the reservoir window is exhausted
}

TEST(CpnValidate, RejectsMalformedNets) {
  EXPECT_THROW(cpn_of("place P : (int); transition T { in P(nu x); }"), ValidationError);
  EXPECT_THROW(cpn_of("place P : (int); transition T { in P(x); priority urgent; }"), ValidationError);
  EXPECT_THROW(cpn_of("place P : (int); transition T { in Q(x); }"), SchemaError);
  EXPECT_THROW(cpn_of("relation R(a: int); place P : (int);"), ValidationError);
  EXPECT_THROW(cpn_of("place P : (int) weird;"), ValidationError);
}
