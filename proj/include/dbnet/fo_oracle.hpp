#pragma once

// Brute-force first-order evaluation over the active domain. Slow by design;
// it exists to cross-check the join evaluator and the constraint checker.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbnet/query.hpp"

namespace dbnet {

struct FoFormula {
  enum class Kind { True, False, Atom, Pred, Not, And, Or, Implies, Exists, Forall };
  Kind kind = Kind::True;
  dbnet::Atom atom;
  Literal pred;  // `negated` is ignored; negation is a Not node
  std::vector<FoFormula> kids;
  std::vector<TypedVar> vars;

  static FoFormula truth() { return {}; }
  static FoFormula falsity() { return {Kind::False, {}, {}, {}, {}}; }
  static FoFormula rel(dbnet::Atom a) { return {Kind::Atom, std::move(a), {}, {}, {}}; }
  static FoFormula predicate(Predicate p, Term l, Term r) { return {Kind::Pred, {}, Literal{p, l, r, false}, {}, {}}; }
  static FoFormula neg(FoFormula f) { return {Kind::Not, {}, {}, {std::move(f)}, {}}; }
  static FoFormula all_of(std::vector<FoFormula> fs) { return {Kind::And, {}, {}, std::move(fs), {}}; }
  static FoFormula any_of(std::vector<FoFormula> fs) { return {Kind::Or, {}, {}, std::move(fs), {}}; }
  static FoFormula implies(FoFormula a, FoFormula b) { return {Kind::Implies, {}, {}, {std::move(a), std::move(b)}, {}}; }
  static FoFormula exists(std::vector<TypedVar> vs, FoFormula f) { return {Kind::Exists, {}, {}, {std::move(f)}, std::move(vs)}; }
  static FoFormula forall(std::vector<TypedVar> vs, FoFormula f) { return {Kind::Forall, {}, {}, {std::move(f)}, std::move(vs)}; }
};

namespace detail {

class FoEvaluator {
 public:
  explicit FoEvaluator(const Instance& inst) : inst_(inst) {}

  const std::vector<Value>& domain(TypeId t) {
    auto it = adom_.find(t);
    if (it == adom_.end()) {
      auto s = active_domain(inst_, t);
      it = adom_.emplace(t, std::vector<Value>(s.begin(), s.end())).first;
    }
    return it->second;
  }

  bool eval(const FoFormula& f, std::map<std::string, Value>& env) {
    using K = FoFormula::Kind;
    switch (f.kind) {
      case K::True: return true;
      case K::False: return false;
      case K::Atom: {
        Tuple t;
        for (const auto& a : f.atom.args) t.push_back(value(a, env));
        auto r = inst_.schema().find(f.atom.relation);
        return r && inst_.contains(*r, t);
      }
      case K::Pred: return eval_predicate(f.pred.pred, value(f.pred.lhs, env), value(f.pred.rhs, env));
      case K::Not: return !eval(f.kids[0], env);
      case K::And:
        for (const auto& k : f.kids)
          if (!eval(k, env)) return false;
        return true;
      case K::Or:
        for (const auto& k : f.kids)
          if (eval(k, env)) return true;
        return false;
      case K::Implies: return !eval(f.kids[0], env) || eval(f.kids[1], env);
      case K::Exists: return quantify(f, 0, env, true);
      case K::Forall: return !quantify(f, 0, env, false);
    }
    return false;
  }

 private:
  static Value value(const Term& t, const std::map<std::string, Value>& env) {
    if (!t.is_var()) return t.value;
    auto it = env.find(t.var);
    if (it == env.end()) throw BindingError("free variable '" + t.var + "' in formula");
    return it->second;
  }

  // Searches for an assignment making the body equal to `want`.
  bool quantify(const FoFormula& f, std::size_t i, std::map<std::string, Value>& env, bool want) {
    if (i == f.vars.size()) return eval(f.kids[0], env) == want;
    const auto& v = f.vars[i];
    auto saved = env.find(v.name) != env.end() ? std::optional<Value>(env[v.name]) : std::nullopt;
    bool found = false;
    for (const auto& o : domain(v.type)) {
      env[v.name] = o;
      if (quantify(f, i + 1, env, want)) {
        found = true;
        break;
      }
    }
    if (saved) env[v.name] = *saved;
    else env.erase(v.name);
    return found;
  }

  const Instance& inst_;
  std::map<TypeId, std::vector<Value>> adom_;
};

}  // namespace detail

/// Every assignment of `free` (drawn from the active domain) satisfying f.
inline AnswerSet eval_fo_oracle(const FoFormula& f, const std::vector<TypedVar>& free, const Instance& inst) {
  detail::FoEvaluator ev(inst);
  AnswerSet out{free, {}};
  std::map<std::string, Value> env;
  Tuple row(free.size());
  auto rec = [&](auto& self, std::size_t i) -> void {
    if (i == free.size()) {
      if (ev.eval(f, env)) out.rows.insert(row);
      return;
    }
    for (const auto& o : ev.domain(free[i].type)) {
      env[free[i].name] = o;
      row[i] = o;
      self(self, i + 1);
    }
    env.erase(free[i].name);
  };
  rec(rec, 0);
  return out;
}

inline bool holds(const FoFormula& closed, const Instance& inst) {
  return !eval_fo_oracle(closed, {}, inst).rows.empty();
}

inline FoFormula to_fo(const Conjunct& c) {
  std::vector<FoFormula> parts;
  for (const auto& a : c.atoms) parts.push_back(FoFormula::rel(a));
  for (const auto& l : c.filters) {
    auto p = FoFormula::predicate(l.pred, l.lhs, l.rhs);
    parts.push_back(l.negated ? FoFormula::neg(std::move(p)) : std::move(p));
  }
  auto body = FoFormula::all_of(std::move(parts));
  return c.existentials.empty() ? body : FoFormula::exists(c.existentials, std::move(body));
}

inline FoFormula to_fo(const UcqQuery& q) {
  std::vector<FoFormula> ds;
  for (const auto& c : q.disjuncts) ds.push_back(to_fo(c));
  return FoFormula::any_of(std::move(ds));
}

/// The closed formula a constraint stands for.
inline FoFormula constraint_formula(const Schema& schema, const Constraint& c) {
  auto vars_for = [&](const std::string& rel, const std::string& prefix) {
    std::vector<TypedVar> vs;
    const auto& r = schema.relation(rel);
    for (std::size_t i = 0; i < r.arity(); ++i) vs.push_back({prefix + std::to_string(i), r.attributes[i].type});
    return vs;
  };
  auto atom_of = [](const std::string& rel, const std::vector<TypedVar>& vs) {
    Atom a{rel, {}};
    for (const auto& v : vs) a.args.push_back(Term::variable(v.name));
    return FoFormula::rel(std::move(a));
  };
  auto eq = [](const TypedVar& a, const TypedVar& b) {
    return FoFormula::predicate(Predicate::Eq, Term::variable(a.name), Term::variable(b.name));
  };
  if (auto* pk = std::get_if<PrimaryKey>(&c)) {
    auto x = vars_for(pk->relation, "x");
    auto y = vars_for(pk->relation, "y");
    std::vector<FoFormula> pre{atom_of(pk->relation, y)};
    for (auto k : pk->columns) pre.push_back(eq(x[k], y[k]));
    std::vector<FoFormula> same;
    for (std::size_t j = 0; j < x.size(); ++j) same.push_back(eq(x[j], y[j]));
    // ∀x. R(x) → ∀y. (R(y) ∧ x_K = y_K) → x = y, nested so the inner
    // quantifier only runs for facts of R.
    return FoFormula::forall(
        x, FoFormula::implies(atom_of(pk->relation, x),
                              FoFormula::forall(y, FoFormula::implies(FoFormula::all_of(pre), FoFormula::all_of(same)))));
  }
  if (auto* fk = std::get_if<ForeignKey>(&c)) {
    auto x = vars_for(fk->source, "x");
    auto y = vars_for(fk->target, "y");
    std::vector<FoFormula> match{atom_of(fk->target, y)};
    for (std::size_t i = 0; i < fk->source_columns.size(); ++i)
      match.push_back(eq(x[fk->source_columns[i]], y[fk->target_columns[i]]));
    return FoFormula::forall(x, FoFormula::implies(atom_of(fk->source, x),
                                                   FoFormula::exists(y, FoFormula::all_of(match))));
  }
  const auto& d = std::get<DomainConstraint>(c);
  auto x = vars_for(d.relation, "x");
  std::vector<FoFormula> options;
  for (const auto& v : d.allowed)
    options.push_back(FoFormula::predicate(Predicate::Eq, Term::variable(x[d.column].name), Term::constant(v)));
  return FoFormula::forall(x, FoFormula::implies(atom_of(d.relation, x), FoFormula::any_of(options)));
}

}  // namespace dbnet
