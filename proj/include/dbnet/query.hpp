#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbnet/relational.hpp"

namespace dbnet {

struct Atom {
  std::string relation;
  std::vector<Term> args;
  bool operator==(const Atom&) const = default;
};

/// P(lhs, rhs) or its negation, P a type predicate.
struct Literal {
  Predicate pred = Predicate::Eq;
  Term lhs;
  Term rhs;
  bool negated = false;

  std::string text() const {
    if (pred == Predicate::Eq) return lhs.text() + (negated ? " != " : " = ") + rhs.text();
    std::string body = pred == Predicate::Succ ? "succ(" + lhs.text() + ", " + rhs.text() + ")"
                                               : lhs.text() + " " + predicate_name(pred) + " " + rhs.text();
    return negated ? "not " + body : body;
  }
  bool operator==(const Literal&) const = default;
};

/// φ ::= true | S(y) | ¬φ | φ ∧ φ
struct Guard {
  enum class Kind { True, Lit, Not, And };
  Kind kind = Kind::True;
  Literal lit;
  std::vector<Guard> children;

  static Guard truth() { return {}; }
  static Guard literal(Literal l) { return Guard{Kind::Lit, std::move(l), {}}; }
  static Guard negation(Guard g) { return Guard{Kind::Not, {}, {std::move(g)}}; }
  static Guard conjunction(std::vector<Guard> gs) {
    if (gs.empty()) return truth();
    if (gs.size() == 1) return std::move(gs.front());
    return Guard{Kind::And, {}, std::move(gs)};
  }
  /// ¬(¬a ∧ ¬b ∧ ...), the only way the grammar spells a disjunction.
  static Guard disjunction(std::vector<Guard> gs) {
    if (gs.empty()) return negation(truth());
    if (gs.size() == 1) return std::move(gs.front());
    std::vector<Guard> neg;
    for (auto& g : gs) neg.push_back(negation(std::move(g)));
    return negation(conjunction(std::move(neg)));
  }

  bool is_true() const { return kind == Kind::True; }

  void collect_vars(std::set<std::string>& out) const {
    if (kind == Kind::Lit) {
      if (lit.lhs.is_var()) out.insert(lit.lhs.var);
      if (lit.rhs.is_var()) out.insert(lit.rhs.var);
    }
    for (const auto& c : children) c.collect_vars(out);
  }
  std::set<std::string> vars() const {
    std::set<std::string> out;
    collect_vars(out);
    return out;
  }
  void collect_literals(std::vector<const Literal*>& out) const {
    if (kind == Kind::Lit) out.push_back(&lit);
    for (const auto& c : children) c.collect_literals(out);
  }

  std::string text() const {
    switch (kind) {
      case Kind::True: return "true";
      case Kind::Lit: return lit.text();
      case Kind::Not: return "not (" + children[0].text() + ")";
      case Kind::And: {
        std::string s;
        for (std::size_t i = 0; i < children.size(); ++i) {
          bool paren = children[i].kind == Kind::And;
          s += (i ? " & " : "") + std::string(paren ? "(" : "") + children[i].text() + (paren ? ")" : "");
        }
        return s;
      }
    }
    return "";
  }
  bool operator==(const Guard&) const = default;
};

using VarLookup = std::function<const Value*(const std::string&)>;

inline Value lookup_term(const Term& t, const VarLookup& env) {
  if (!t.is_var()) return t.value;
  const auto* v = env(t.var);
  if (!v) throw BindingError("variable '" + t.var + "' is unbound");
  return *v;
}

inline bool eval_literal(const Literal& l, const VarLookup& env) {
  bool r = eval_predicate(l.pred, lookup_term(l.lhs, env), lookup_term(l.rhs, env));
  return l.negated ? !r : r;
}

inline bool eval_guard(const Guard& g, const VarLookup& env) {
  switch (g.kind) {
    case Guard::Kind::True: return true;
    case Guard::Kind::Lit: return eval_literal(g.lit, env);
    case Guard::Kind::Not: return !eval_guard(g.children[0], env);
    case Guard::Kind::And:
      for (const auto& c : g.children)
        if (!eval_guard(c, env)) return false;
      return true;
  }
  return false;
}

inline bool eval_guard(const Guard& g, const Substitution& theta) {
  return eval_guard(g, [&](const std::string& n) -> const Value* {
    auto it = theta.find(n);
    return it == theta.end() ? nullptr : &it->second;
  });
}

struct Conjunct {
  std::vector<TypedVar> existentials;
  std::vector<Atom> atoms;
  std::vector<Literal> filters;
  bool operator==(const Conjunct&) const = default;
};

/// ⋁_i ∃y_i. conj_i(x)
struct UcqQuery {
  std::string name;
  std::vector<TypedVar> free_vars;
  std::vector<Conjunct> disjuncts;
  bool operator==(const UcqQuery&) const = default;
};

struct AnswerSet {
  std::vector<TypedVar> vars;
  std::set<Tuple> rows;

  std::vector<Substitution> substitutions() const {
    std::vector<Substitution> out;
    for (const auto& r : rows) {
      Substitution s;
      for (std::size_t i = 0; i < vars.size(); ++i) s[vars[i].name] = r[i];
      out.push_back(std::move(s));
    }
    return out;
  }
  bool operator==(const AnswerSet&) const = default;
};

/// Type of every variable in the conjunct, inferred from atom positions and
/// the declared free variables. Reports clashes into `problems`.
inline std::map<std::string, TypeId> conjunct_var_types(const Schema& schema, const std::vector<TypedVar>& free,
                                                        const Conjunct& c, std::vector<std::string>* problems,
                                                        const std::string& where) {
  std::map<std::string, TypeId> types;
  auto note = [&](const std::string& msg) {
    if (problems) problems->push_back(where + ": " + msg);
  };
  auto bind = [&](const std::string& v, TypeId t, const std::string& ctx) {
    auto [it, fresh] = types.emplace(v, t);
    if (!fresh && it->second != t) note("variable '" + v + "' used with two types (" + ctx + ")");
  };
  for (const auto& v : free) bind(v.name, v.type, "declaration");
  for (const auto& v : c.existentials) bind(v.name, v.type, "declaration");
  for (const auto& a : c.atoms) {
    auto r = schema.find(a.relation);
    if (!r) continue;
    const auto& rel = schema.relation(*r);
    if (a.args.size() != rel.arity()) continue;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      const auto& t = a.args[i];
      auto want = rel.attributes[i].type;
      if (t.is_var()) bind(t.var, want, a.relation);
      else if (t.value.type() != want)
        note("constant " + t.value.text() + " has the wrong type for " + a.relation);
    }
  }
  return types;
}

/// All structural problems of a query; unknown relations are reported with
/// the prefix "unknown relation".
inline std::vector<std::string> query_problems(const Schema& schema, const UcqQuery& q) {
  std::vector<std::string> out;
  const std::string where = "query " + q.name;
  if (q.disjuncts.empty()) out.push_back(where + ": no disjuncts");
  for (std::size_t d = 0; d < q.disjuncts.size(); ++d) {
    const auto& c = q.disjuncts[d];
    std::set<std::string> in_atoms;
    for (const auto& a : c.atoms) {
      auto r = schema.find(a.relation);
      if (!r) {
        out.push_back("unknown relation '" + a.relation + "' in " + where);
        continue;
      }
      if (a.args.size() != schema.relation(*r).arity())
        out.push_back(where + ": atom " + a.relation + " has wrong arity");
      for (const auto& t : a.args)
        if (t.is_var()) in_atoms.insert(t.var);
    }
    auto types = conjunct_var_types(schema, q.free_vars, c, &out, where);
    for (const auto& v : q.free_vars)
      if (!in_atoms.count(v.name)) out.push_back(where + ": unsafe, free variable '" + v.name + "' occurs in no atom");
    for (const auto& v : c.existentials)
      if (!in_atoms.count(v.name)) out.push_back(where + ": unsafe, variable '" + v.name + "' occurs in no atom");
    for (const auto& f : c.filters) {
      std::optional<TypeId> lt, rt;
      for (const auto* t : {&f.lhs, &f.rhs}) {
        std::optional<TypeId> ty;
        if (t->is_var()) {
          if (!in_atoms.count(t->var)) out.push_back(where + ": unsafe, filter variable '" + t->var + "' occurs in no atom");
          if (auto it = types.find(t->var); it != types.end()) ty = it->second;
        } else {
          ty = t->value.type();
        }
        (t == &f.lhs ? lt : rt) = ty;
      }
      if (lt && rt && *lt != *rt) out.push_back(where + ": filter '" + f.text() + "' compares different types");
      if (lt && !schema.types.at(*lt).supports(f.pred))
        out.push_back(where + ": predicate " + predicate_name(f.pred) + " not available on type " + schema.types.name(*lt));
    }
  }
  return out;
}

/// Fills the existential variable list of each disjunct from its atoms.
inline void infer_existentials(const Schema& schema, UcqQuery& q) {
  for (auto& c : q.disjuncts) {
    auto types = conjunct_var_types(schema, q.free_vars, c, nullptr, q.name);
    std::set<std::string> known;
    for (const auto& v : q.free_vars) known.insert(v.name);
    for (const auto& v : c.existentials) known.insert(v.name);
    for (const auto& a : c.atoms)
      for (const auto& t : a.args)
        if (t.is_var() && known.insert(t.var).second) c.existentials.push_back({t.var, types.at(t.var)});
  }
}

inline void require_valid_query(const Schema& schema, const UcqQuery& q) {
  auto problems = query_problems(schema, q);
  for (const auto& p : problems)
    if (p.rfind("unknown relation", 0) == 0) throw SchemaError(p);
  if (!problems.empty()) throw ValidationError(problems.front());
}

namespace detail {

/// One disjunct compiled to variable slots, evaluated by a left-to-right
/// nested-loop join with each filter checked as soon as its variables are set.
struct CompiledConjunct {
  struct Slot {
    bool is_var;
    std::size_t var;
    Value value;
  };
  struct CAtom {
    std::uint32_t relation;
    std::vector<Slot> args;
  };
  struct CFilter {
    Predicate pred;
    Slot lhs, rhs;
    bool negated;
  };
  std::vector<std::string> names;
  std::vector<CAtom> atoms;
  std::vector<std::vector<CFilter>> filters_after;  // index: atoms matched so far
  std::vector<std::size_t> head;

  CompiledConjunct(const Schema& schema, const std::vector<TypedVar>& free, const Conjunct& c) {
    std::map<std::string, std::size_t> idx;
    auto slot_of = [&](const Term& t) -> Slot {
      if (!t.is_var()) return {false, 0, t.value};
      auto [it, fresh] = idx.emplace(t.var, names.size());
      if (fresh) names.push_back(t.var);
      return {true, it->second, {}};
    };
    std::vector<std::size_t> bound_at;  // atom count after which a var is bound
    for (const auto& a : c.atoms) {
      CAtom ca{schema.require(a.relation), {}};
      for (const auto& t : a.args) {
        ca.args.push_back(slot_of(t));
        if (ca.args.back().is_var && bound_at.size() < names.size()) bound_at.push_back(atoms.size() + 1);
      }
      atoms.push_back(std::move(ca));
    }
    filters_after.resize(atoms.size() + 1);
    for (const auto& f : c.filters) {
      auto l = slot_of(f.lhs);
      auto r = slot_of(f.rhs);
      std::size_t when = 0;
      for (const auto* s : {&l, &r})
        if (s->is_var) when = std::max(when, s->var < bound_at.size() ? bound_at[s->var] : atoms.size());
      filters_after[when].push_back({f.pred, l, r, f.negated});
    }
    for (const auto& v : free) head.push_back(slot_of(Term::variable(v.name)).var);
  }

  void run(const Instance& inst, std::set<Tuple>& out) const {
    std::vector<Value> env(names.size());
    std::vector<bool> set(names.size(), false);
    search(inst, 0, env, set, out);
  }

 private:
  static const Value& get(const Slot& s, const std::vector<Value>& env) { return s.is_var ? env[s.var] : s.value; }

  bool filters_hold(std::size_t stage, const std::vector<Value>& env) const {
    for (const auto& f : filters_after[stage]) {
      bool r = eval_predicate(f.pred, get(f.lhs, env), get(f.rhs, env));
      if (r == f.negated) return false;
    }
    return true;
  }

  void search(const Instance& inst, std::size_t k, std::vector<Value>& env, std::vector<bool>& set,
              std::set<Tuple>& out) const {
    if (!filters_hold(k, env)) return;
    if (k == atoms.size()) {
      Tuple row;
      for (auto h : head) row.push_back(env[h]);
      out.insert(std::move(row));
      return;
    }
    const auto& a = atoms[k];
    for (const auto& e : inst.facts(a.relation)) {
      const auto& t = e.tuple();
      std::vector<std::size_t> newly;
      bool ok = true;
      for (std::size_t i = 0; i < a.args.size() && ok; ++i) {
        const auto& s = a.args[i];
        if (!s.is_var) ok = s.value == t[i];
        else if (set[s.var]) ok = env[s.var] == t[i];
        else {
          env[s.var] = t[i];
          set[s.var] = true;
          newly.push_back(s.var);
        }
      }
      if (ok) search(inst, k + 1, env, set, out);
      for (auto v : newly) set[v] = false;
    }
  }
};

}  // namespace detail

/// Answers of a safe UCQ≠ query under active-domain semantics.
inline AnswerSet eval_ucq(const UcqQuery& q, const Instance& inst) {
  require_valid_query(inst.schema(), q);
  AnswerSet ans{q.free_vars, {}};
  for (const auto& c : q.disjuncts) detail::CompiledConjunct(inst.schema(), q.free_vars, c).run(inst, ans.rows);
  return ans;
}

struct ViewCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Whether the query's free variables match a place color component-wise.
inline ViewCheck validate_view_query(const UcqQuery& q, const std::vector<TypeId>& color,
                                     const TypeDomain* types = nullptr) {
  ViewCheck r;
  auto tn = [&](TypeId t) { return types ? types->name(t) : "#" + std::to_string(t.index); };
  if (q.free_vars.size() != color.size()) {
    r.ok = false;
    r.problems.push_back("arity mismatch: query " + q.name + " has " + std::to_string(q.free_vars.size()) +
                         " free variables, color has " + std::to_string(color.size()) + " components");
    return r;
  }
  for (std::size_t i = 0; i < color.size(); ++i)
    if (q.free_vars[i].type != color[i]) {
      r.ok = false;
      r.problems.push_back("position " + std::to_string(i + 1) + ": query " + q.name + " yields " +
                           tn(q.free_vars[i].type) + ", color expects " + tn(color[i]));
    }
  return r;
}

}  // namespace dbnet
