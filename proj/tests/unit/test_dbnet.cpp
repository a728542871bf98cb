#include <gtest/gtest.h>

#include "support.hpp"

using namespace dbnet;
using namespace dbnet::test;

namespace {

const char* minting = R"(
type tok : string;
relation Seen(v: tok key);
query Q_seen(v: tok) := Seen(v);
action see(v: tok) { add Seen(v); }
view SeenV : (tok) := Q_seen;
place Src : (int);
place Dst : (tok);
transition Make { in Src(x); out Dst(nu c); }
transition Drop { in Dst(c); action see(c); }
initial { token Src(1); token Src(2); }
)";

std::string problems_of(std::string_view text) {
  try {
    std::string out;
    for (const auto& v : validate(dbnet_of(text))) out += v.text() + "\n";
    return out;
  } catch (const Error& e) {
    return e.what();
  }
}

Snapshot fire_one(const DbNet& net, const Snapshot& s, std::string_view t) {
  auto bs = enabled_bindings(net, s, t, net.policy);
  EXPECT_FALSE(bs.empty()) << t;
  return fire(net, s, t, bs.at(0)).next;
}

}  // namespace

TEST(DbNetValidate, CorpusModelsAreValid) {
  EXPECT_TRUE(validate(shopping_cart(2, 2)).empty());
  EXPECT_TRUE(validate(corpus_net("staff-desk.dbn", {{"desks", 2}})).empty());
}

TEST(DbNetValidate, ReadArcsOnlyOnViews) {
  auto p = problems_of(R"(
    relation R(a: int);
    place P : (int);
    place Q : (int);
    transition T { in P(x); read Q(x); out P(x); }
  )");
  EXPECT_NE(p, "");
}

TEST(DbNetValidate, GuardVariablesMustBeBoundByInputs) {
  auto p = problems_of(R"(
    relation R(a: int);
    place P : (int);
    transition T { in P(x); guard y != x; out P(y); }
    policy { sample int = {1}; }
  )");
  EXPECT_NE(p.find("guard"), std::string::npos) << p;
}

TEST(DbNetValidate, ViewColorMustMatchItsQuery) {
  auto p = problems_of(R"(
    relation R(a: int);
    query Q(x: int) := R(x);
    view V : (string) := Q;
    place P : (string);
    transition T { read V(x); out P(x); }
  )");
  EXPECT_NE(p.find("view color mismatch"), std::string::npos) << p;
}

TEST(DbNetValidate, InitialFactsMustSatisfyConstraints) {
  auto p = problems_of(R"(
    relation R(a: int key, b: int);
    initial { fact R(1, 1); fact R(1, 2); }
  )");
  EXPECT_NE(p.find("initial"), std::string::npos) << p;
}

TEST(DbNetFire, LogInReadsTheUserViewAndMintsACart) {
  auto net = shopping_cart();
  auto bs = enabled_bindings(net, net.initial, "LogIn", net.policy);
  ASSERT_EQ(bs.size(), 1u);
  EXPECT_EQ(bs[0].at("uid"), I(1));
  EXPECT_EQ(bs[0].at("cid"), typed(net, "cartid", "cartid#1"));
  auto r = fire(net, net.initial, "LogIn", bs[0]);
  EXPECT_EQ(r.outcome, Outcome::Committed);
  EXPECT_EQ(r.next.instance, net.initial.instance);
  EXPECT_EQ(r.label.substr(0, 6), "LogIn[");
  EXPECT_EQ(r.label.substr(r.label.size() - 7), "/commit");
  auto text = snapshot_text(net, r.next).body();
  EXPECT_NE(text.find("Logged(1,\"cartid#1\")"), std::string::npos) << text;
  EXPECT_EQ(text.find("Visitors("), std::string::npos) << text;
}

TEST(DbNetFire, DisabledBindingIsAContractError) {
  auto net = shopping_cart();
  EXPECT_THROW(fire(net, net.initial, "LogIn", {{"uid", I(2)}, {"cid", typed(net, "cartid", "cartid#1")}}),
               ContractError);
  EXPECT_THROW(fire(net, net.initial, "CheckOut", {}), ContractError);
  EXPECT_THROW(fire(net, net.initial, "NoSuch", {}), SchemaError);
}

TEST(DbNetFire, RollbackKeepsFactsAndTakesTheRollbackArcs) {
  auto net = shopping_cart();
  auto logged = fire_one(net, net.initial, "LogIn");
  auto bs = enabled_bindings(net, logged, "AcquireBonus", net.policy);
  ASSERT_EQ(bs.size(), 3u);  // one per sampled bonus
  for (const auto& b : bs) {
    auto r = fire(net, logged, "AcquireBonus", b);
    if (b.at("bt") == typed(net, "bonus", "15eur")) {
      // adding a fact already present changes nothing
      EXPECT_EQ(r.outcome, Outcome::Committed);
      EXPECT_EQ(r.next, logged);
      continue;
    }
    // user 1 already holds another bonus, and "oops" is outside the domain
    EXPECT_EQ(r.outcome, Outcome::RolledBack);
    EXPECT_EQ(r.next.instance, logged.instance);
    EXPECT_EQ(r.label.substr(r.label.size() - 9), "/rollback");
    auto text = snapshot_text(net, r.next).body();
    EXPECT_NE(text.find("Rebonus(1,\"cartid#1\","), std::string::npos) << text;
    EXPECT_EQ(text.find("Logged("), std::string::npos) << text;
  }
}

TEST(DbNetFire, ChangeBonusReplacesTheFact) {
  auto net = shopping_cart();
  auto logged = fire_one(net, net.initial, "LogIn");
  Substitution acquire{{"uid", I(1)}, {"cid", typed(net, "cartid", "cartid#1")}, {"bt", typed(net, "bonus", "50%")}};
  auto rebonus = fire(net, logged, "AcquireBonus", acquire).next;
  auto bs = enabled_bindings(net, rebonus, "ChangeBonus", net.policy);
  ASSERT_EQ(bs.size(), 1u);
  auto r = fire(net, rebonus, "ChangeBonus", bs[0]);
  EXPECT_EQ(r.outcome, Outcome::Committed);
  EXPECT_EQ(r.next.instance.tuples("WithBonus"), (std::vector<Tuple>{{I(1), typed(net, "bonus", "50%")}}));
}

TEST(DbNetFresh, RecyclingReusesTheFirstUnusedValue) {
  auto net = dbnet_of(minting);
  net.policy.set_mode("recycling");
  auto tok = [&](int i) { return typed(net, "tok", "tok#" + std::to_string(i)); };
  auto s1 = fire_one(net, net.initial, "Make");
  auto s2 = fire_one(net, s1, "Make");
  EXPECT_NE(snapshot_text(net, s2).body().find("Dst(\"tok#2\")"), std::string::npos);

  // a value stored in the database is in use as well
  auto s3 = fire(net, s1, "Drop", {{"c", tok(1)}}).next;
  auto after = enabled_bindings(net, s3, "Make", net.policy);
  ASSERT_EQ(after.size(), 1u);
  EXPECT_EQ(after[0].at("c"), tok(2));
}

TEST(DbNetFresh, UnboundedContinuesAfterTheLastValueInUse) {
  auto net = dbnet_of(minting);
  net.policy.set_mode("unbounded");
  auto tok = [&](int i) { return typed(net, "tok", "tok#" + std::to_string(i)); };
  auto s = net.empty_snapshot();
  net.add_token(s, "Src", {I(1)});
  net.add_token(s, "Dst", {tok(2)});
  auto bs = enabled_bindings(net, s, "Make", net.policy);
  ASSERT_EQ(bs.size(), 1u);
  EXPECT_EQ(bs[0].at("c"), tok(3));

  net.policy.set_mode("recycling");
  EXPECT_EQ(enabled_bindings(net, s, "Make", net.policy).at(0).at("c"), tok(1));
}

TEST(DbNetFresh, BoundedChoosesAmongTheFirstK) {
  auto net = dbnet_of(minting);
  auto tok = [&](int i) { return typed(net, "tok", "tok#" + std::to_string(i)); };
  auto s = net.empty_snapshot();
  net.add_token(s, "Src", {I(1)});
  net.add_token(s, "Dst", {tok(1)});
  net.policy.set_mode("bounded:1");
  EXPECT_TRUE(enabled_bindings(net, s, "Make", net.policy).empty());
  net.policy.set_mode("bounded:3");
  auto bs = enabled_bindings(net, s, "Make", net.policy);
  std::set<Value> got;
  for (const auto& b : bs) got.insert(b.at("c"));
  EXPECT_EQ(got, (std::set<Value>{tok(2), tok(3)}));
  EXPECT_THROW(net.policy.set_mode("bounded:0"), ValidationError);
  EXPECT_THROW(net.policy.set_mode("sometimes"), ValidationError);
}

TEST(DbNetLts, ExplorationIsDeterministicAndLabelsCarryOutcomes) {
  auto net = shopping_cart(1, 1, "bounded:1");
  auto a = build_lts(net, net.initial, net.policy, Limits{});
  auto b = build_lts(net, net.initial, net.policy, Limits{});
  ASSERT_FALSE(a.truncated);
  EXPECT_EQ(a.states.size(), b.states.size());
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_GT(a.states.size(), 5u);
  for (std::size_t l = 1; l < a.labels.size(); ++l) {
    const auto& s = a.labels[l];
    bool commit = s.size() > 7 && s.substr(s.size() - 7) == "/commit";
    bool rollback = s.size() > 9 && s.substr(s.size() - 9) == "/rollback";
    EXPECT_TRUE(commit || rollback) << s;
  }
  auto small = build_lts(net, net.initial, net.policy, Limits{3, SIZE_MAX, 1});
  EXPECT_TRUE(small.truncated);
  EXPECT_LE(small.states.size(), 3u);
}

TEST(DbNetLts, EveryReachableInstanceSatisfiesTheConstraints) {
  auto net = corpus_net("staff-desk.dbn", {{"desks", 2}});
  auto lts = build_lts(net, net.initial, net.policy, Limits{});
  ASSERT_FALSE(lts.truncated);
  for (const auto& s : lts.states) EXPECT_TRUE(satisfies_all(s.instance)) << s.instance.text();
}
