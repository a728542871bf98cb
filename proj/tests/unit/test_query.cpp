#include <gtest/gtest.h>

#include "support.hpp"

using namespace dbnet;
using namespace dbnet::test;

namespace {

Instance warehouse(const DbNet& net) {
  Instance inst(net.schema);
  inst.insert("Product", {S("tv")});
  inst.insert("InWarehouse", {I(7), S("tv"), R("99.9")});
  inst.insert("InWarehouse", {I(8), S("tv"), Value::null(TypeDomain::Real)});
  return inst;
}

}  // namespace

TEST(EvalUcq, NullCostRowsAreFilteredOut) {
  auto net = shopping_cart();
  auto inst = warehouse(net);
  auto ans = eval_ucq(*net.query("Q_products"), inst);
  EXPECT_EQ(ans.rows, (std::set<Tuple>{{I(7), S("tv"), R("99.9")}}));
  ASSERT_EQ(ans.substitutions().size(), 1u);
  EXPECT_EQ(ans.substitutions()[0].at("pid"), I(7));
}

TEST(EvalUcq, MatchesTheFirstOrderOracle) {
  auto net = shopping_cart();
  auto inst = warehouse(net);
  inst.insert("User", {I(1), S("a")});
  inst.insert("WithBonus", {I(1), typed(net, "bonus", "50%")});
  for (const auto& q : net.queries)
    EXPECT_EQ(eval_ucq(q, inst).rows, eval_fo_oracle(to_fo(q), q.free_vars, inst).rows) << q.name;
}

TEST(EvalUcq, UnionRemovesDuplicates) {
  auto net = corpus_net("staff-desk.dbn");
  auto ans = eval_ucq(*net.query("Q_staff"), net.initial.instance);
  EXPECT_EQ(ans.rows, (std::set<Tuple>{{I(1)}, {I(2)}}));
}

TEST(EvalUcq, EmptyInstanceGivesNoAnswers) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  for (const auto& q : net.queries) EXPECT_TRUE(eval_ucq(q, inst).rows.empty()) << q.name;
}

TEST(FoOracle, QuantifiersOverTheActiveDomain) {
  auto net = shopping_cart();
  Instance inst(net.schema);
  inst.insert("User", {I(1), S("a")});
  TypedVar x{"x", TypeDomain::Int};
  auto user_a = FoFormula::rel(Atom{"User", {Term::variable("x"), Term::constant(S("a"))}});
  EXPECT_TRUE(holds(FoFormula::exists({x}, user_a), inst));
  EXPECT_TRUE(holds(FoFormula::forall({x}, user_a), inst));

  Instance empty(net.schema);
  EXPECT_TRUE(holds(FoFormula::forall({x}, user_a), empty));
  EXPECT_FALSE(holds(FoFormula::exists({x}, user_a), empty));
}

TEST(ViewQuery, FreeVariablesMustMatchTheColor) {
  auto net = shopping_cart();
  const auto& q = *net.query("Q_users");
  EXPECT_TRUE(validate_view_query(q, {TypeDomain::Int}).ok);

  auto wrong = validate_view_query(q, {TypeDomain::String}, &net.types());
  EXPECT_FALSE(wrong.ok);
  ASSERT_EQ(wrong.problems.size(), 1u);
  EXPECT_NE(wrong.problems[0].find("position 1"), std::string::npos);

  auto arity = validate_view_query(q, {TypeDomain::Int, TypeDomain::Int});
  EXPECT_FALSE(arity.ok);
  EXPECT_NE(arity.problems[0].find("arity"), std::string::npos);
}

std::string first_problem(std::string_view text) {
  try {
    auto vs = validate(dbnet_of(text));
    return vs.empty() ? "" : vs.front().text();
  } catch (const Error& e) {
    return e.what();
  }
}

TEST(QueryValidation, UnsafeQueriesAreRejected) {
  EXPECT_NE(first_problem(R"(
    relation R(a: int);
    query Q(x: int, y: int) := R(x);
  )").find("unsafe"),
            std::string::npos);
  EXPECT_NE(first_problem(R"(
    relation R(a: int);
    query Q(x: int) := R(x) & y != 3;
  )").find("unsafe"),
            std::string::npos);
  EXPECT_EQ(first_problem(R"(
    relation R(a: int);
    query Q(x: int) := R(x) & x != 3;
  )"),
            "");
}
