#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace dbnet;
using namespace dbnet::test;

namespace {

Substitution bind(std::initializer_list<std::pair<const std::string, Value>> kv) { return Substitution(kv); }

}  // namespace

TEST(ActiveDomain, CollectsValuesOfTheRequestedType) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  inst.insert("User", {I(1), S("a")});
  inst.insert("User", {I(2), S("b")});
  EXPECT_EQ(active_domain(inst, TypeDomain::Int), (std::set<Value>{I(1), I(2)}));

  Instance only(net.schema);
  only.insert("InWarehouse", {I(7), S("tv"), R("99.9")});
  EXPECT_EQ(active_domain(only, TypeDomain::String), (std::set<Value>{S("tv")}));
  EXPECT_EQ(active_domain(only, TypeDomain::Real), (std::set<Value>{R("99.9")}));
  EXPECT_TRUE(active_domain(only, TypeDomain::Bool).empty());
}

TEST(Instance, IsASetAndChecksTypes) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  EXPECT_TRUE(inst.insert("User", {I(1), S("a")}));
  EXPECT_FALSE(inst.insert("User", {I(1), S("a")}));
  EXPECT_EQ(inst.size(), 1u);
  EXPECT_THROW(inst.insert("User", {S("x"), S("a")}), TypeError);
  EXPECT_THROW(inst.insert("User", {I(1)}), TypeError);
  EXPECT_THROW(inst.insert("Nobody", {I(1)}), SchemaError);
}

TEST(Constraints, KeyForeignKeyAndDomain) {
  auto net = shopping_cart();
  auto bonus = [&](std::string_view v) { return typed(net, "bonus", v); };
  Instance inst(net.schema);
  inst.insert("User", {I(1), S("a")});
  EXPECT_TRUE(satisfies_all(inst));

  auto dup = inst;
  dup.insert("User", {I(1), S("b")});
  EXPECT_FALSE(satisfies_all(dup));

  auto dangling = inst;
  dangling.insert("WithBonus", {I(9), bonus("50%")});
  EXPECT_FALSE(satisfies_all(dangling));

  auto outside = inst;
  outside.insert("WithBonus", {I(1), bonus("oops")});
  EXPECT_EQ(violated_constraints(outside).size(), 1u);
}

TEST(ApplyAction, CommitsWhenConstraintsHold) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  inst.insert("User", {I(1), S("a")});
  auto r = apply_action(inst, *net.action("addb"), bind({{"uid", I(1)}, {"bt", typed(net, "bonus", "50%")}}));
  EXPECT_EQ(r.outcome, Outcome::Committed);
  EXPECT_TRUE(r.instance.contains("WithBonus", {I(1), typed(net, "bonus", "50%")}));
  EXPECT_EQ(r.instance.size(), 2u);
}

TEST(ApplyAction, RollsBackOnDanglingReference) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  inst.insert("User", {I(1), S("a")});
  auto r = apply_action(inst, *net.action("addb"), bind({{"uid", I(9)}, {"bt", typed(net, "bonus", "50%")}}));
  EXPECT_EQ(r.outcome, Outcome::RolledBack);
  EXPECT_EQ(r.instance, inst);
}

TEST(ApplyAction, RollsBackOnValueOutsideDomain) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  inst.insert("User", {I(1), S("a")});
  auto r = apply_action(inst, *net.action("addb"), bind({{"uid", I(1)}, {"bt", typed(net, "bonus", "oops")}}));
  EXPECT_EQ(r.outcome, Outcome::RolledBack);
  EXPECT_EQ(r.instance, inst);
}

TEST(ApplyAction, AdditionWinsOverDeletionOfTheSameFact) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  inst.insert("User", {I(1), S("a")});
  auto b = typed(net, "bonus", "15eur");
  auto r = apply_action(inst, *net.action("change"), bind({{"uid", I(1)}, {"old", b}, {"new", b}}));
  EXPECT_EQ(r.outcome, Outcome::Committed);
  EXPECT_TRUE(r.instance.contains("WithBonus", {I(1), b}));
}

TEST(ApplyAction, ReplacesAKeyedFactInOneStep) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  inst.insert("User", {I(1), S("a")});
  inst.insert("WithBonus", {I(1), typed(net, "bonus", "15eur")});
  auto r = apply_action(inst, *net.action("change"),
                        bind({{"uid", I(1)}, {"old", typed(net, "bonus", "15eur")}, {"new", typed(net, "bonus", "50%")}}));
  EXPECT_EQ(r.outcome, Outcome::Committed);
  EXPECT_EQ(r.instance.tuples("WithBonus"), (std::vector<Tuple>{{I(1), typed(net, "bonus", "50%")}}));
}

TEST(ApplyAction, RejectsBadBindings) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  EXPECT_THROW(apply_action(inst, *net.action("addb"), bind({{"uid", I(1)}})), BindingError);
  EXPECT_THROW(apply_action(inst, *net.action("addb"), bind({{"uid", S("1")}, {"bt", typed(net, "bonus", "50%")}})),
               TypeError);
}

TEST(Constraints, AgreeWithTheirFirstOrderReading) {
  auto net = corpus_net("staff-desk.dbn");
  const auto& schema = *net.schema;
  auto level = [&](std::string_view v) { return typed(net, "level", v); };
  std::vector<Value> levels{level("gold"), level("silver"), level("bronze")};
  std::mt19937_64 rng(7);
  std::size_t violations = 0;
  for (int round = 0; round < 300; ++round) {
    Instance inst(net.schema);
    auto n = rng() % 5;
    for (std::size_t i = 0; i < n; ++i) inst.insert("Emp", {I(rng() % 4), I(rng() % 4)});
    n = rng() % 3;
    for (std::size_t i = 0; i < n; ++i) inst.insert("Badge", {I(rng() % 4), levels[rng() % 3]});
    for (const auto& c : schema.constraints) {
      bool direct = check_constraint(inst, c);
      violations += !direct;
      ASSERT_EQ(direct, holds(constraint_formula(schema, c), inst)) << inst.text();
    }
  }
  EXPECT_GT(violations, 0u);
}

TEST(Schema, RejectsMalformedConstraints) {
  auto net = shopping_cart();
  Schema s = *net.schema;
  EXPECT_THROW(s.add_constraint(ForeignKey{"WithBonus", {0}, "User", {1}}), ValidationError);
  EXPECT_THROW(s.add_constraint(DomainConstraint{"User", 5, {}}), ValidationError);
  EXPECT_THROW(s.add_relation({"User", {{"x", TypeDomain::Int, false}}}), ValidationError);
}
