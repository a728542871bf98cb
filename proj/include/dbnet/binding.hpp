#pragma once

// Shared binding enumeration for DB-net transitions and ν-CPN transitions:
// pattern matching of arc inscriptions against tuple bags, guard filtering,
// then external inputs and fresh values.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dbnet/bag.hpp"
#include "dbnet/fresh.hpp"
#include "dbnet/query.hpp"

namespace dbnet {

struct Slot {
  bool is_var = false;
  std::uint32_t var = 0;
  Value value;

  const Value& get(const std::vector<Value>& env) const { return is_var ? env[var] : value; }
};

struct CompiledGuard {
  Guard::Kind kind = Guard::Kind::True;
  Predicate pred = Predicate::Eq;
  Slot lhs, rhs;
  bool negated = false;
  std::vector<CompiledGuard> kids;

  bool eval(const std::vector<Value>& env) const {
    switch (kind) {
      case Guard::Kind::True: return true;
      case Guard::Kind::Lit: return eval_predicate(pred, lhs.get(env), rhs.get(env)) != negated;
      case Guard::Kind::Not: return !kids[0].eval(env);
      case Guard::Kind::And:
        for (const auto& k : kids)
          if (!k.eval(env)) return false;
        return true;
    }
    return false;
  }

  void collect_vars(std::set<std::uint32_t>& out) const {
    if (kind == Guard::Kind::Lit) {
      if (lhs.is_var) out.insert(lhs.var);
      if (rhs.is_var) out.insert(rhs.var);
    }
    for (const auto& k : kids) k.collect_vars(out);
  }
};

struct PatternArc {
  std::uint32_t source = 0;
  std::vector<Slot> slots;
  bool consume = true;
};

struct Production {
  std::uint32_t target = 0;
  std::vector<Slot> slots;

  Tuple instantiate(const std::vector<Value>& env) const {
    Tuple t;
    t.reserve(slots.size());
    for (const auto& s : slots) t.push_back(s.get(env));
    return t;
  }
};

/// A transition compiled against numbered sources. Variables are numbered in
/// order of first occurrence.
struct Rule {
  std::string name;
  std::vector<TypedVar> vars;
  std::vector<PatternArc> arcs;
  std::vector<std::vector<CompiledGuard>> guard_after;  // by number of arcs matched
  std::vector<std::uint32_t> fresh;
  std::vector<std::uint32_t> external;
  std::vector<Production> outputs;
  int priority = 1;

  std::optional<std::uint32_t> var_index(std::string_view n) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i].name == n) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }

  Substitution substitution(const std::vector<Value>& env) const {
    Substitution s;
    for (std::size_t i = 0; i < vars.size(); ++i) s[vars[i].name] = env[i];
    return s;
  }

  /// `var=val,...` over variables sorted by name, skipping internal ones.
  std::string binding_text(const std::vector<Value>& env) const {
    std::vector<std::pair<std::string, std::string>> kv;
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i].name.rfind("__", 0) != 0) kv.emplace_back(vars[i].name, env[i].text());
    std::sort(kv.begin(), kv.end());
    std::string s;
    for (const auto& [k, v] : kv) s += (s.empty() ? "" : ",") + k + "=" + v;
    return s;
  }
};

/// Compiles inscriptions into a Rule, inferring and checking variable types.
class RuleBuilder {
 public:
  RuleBuilder(std::string name, const TypeDomain& types) : types_(types) { rule_.name = std::move(name); }

  std::uint32_t declare(const std::string& var, TypeId type, const std::string& where) {
    if (auto it = index_.find(var); it != index_.end()) {
      if (rule_.vars[it->second].type != type)
        throw TypeError(rule_.name + ": variable '" + var + "' is " + types_.name(rule_.vars[it->second].type) +
                        " but " + where + " expects " + types_.name(type));
      return it->second;
    }
    auto id = static_cast<std::uint32_t>(rule_.vars.size());
    rule_.vars.push_back({var, type});
    index_.emplace(var, id);
    return id;
  }

  bool known(const std::string& var) const { return index_.count(var) > 0; }

  Slot slot(const Term& t, TypeId expected, const std::string& where) {
    if (t.is_var()) return Slot{true, declare(t.var, expected, where), {}};
    if (t.value.type() != expected)
      throw TypeError(rule_.name + ": constant " + t.value.text() + " has type " + types_.name(t.value.type()) +
                      " but " + where + " expects " + types_.name(expected));
    return Slot{false, 0, t.value};
  }

  std::vector<Slot> slots(const std::vector<Term>& terms, const std::vector<TypeId>& color, const std::string& where) {
    if (terms.size() != color.size())
      throw TypeError(rule_.name + ": inscription of arity " + std::to_string(terms.size()) + " on " + where +
                      " of arity " + std::to_string(color.size()));
    std::vector<Slot> out;
    for (std::size_t i = 0; i < terms.size(); ++i) out.push_back(slot(terms[i], color[i], where));
    return out;
  }

  void arc(std::uint32_t source, const std::vector<Term>& terms, const std::vector<TypeId>& color, bool consume,
           const std::string& where) {
    rule_.arcs.push_back({source, slots(terms, color, where), consume});
  }

  void output(std::uint32_t target, const std::vector<Term>& terms, const std::vector<TypeId>& color,
              const std::string& where) {
    rule_.outputs.push_back({target, slots(terms, color, where)});
  }

  /// Must run after all arcs; guard variables must be bound by arcs.
  void guard(const Guard& g) {
    rule_.guard_after.assign(rule_.arcs.size() + 1, {});
    std::vector<const Guard*> parts;
    if (g.kind == Guard::Kind::And)
      for (const auto& c : g.children) parts.push_back(&c);
    else if (!g.is_true())
      parts.push_back(&g);
    std::vector<std::size_t> bound_after(rule_.vars.size(), SIZE_MAX);
    {
      std::vector<bool> seen(rule_.vars.size(), false);
      for (std::size_t k = 0; k < rule_.arcs.size(); ++k)
        for (const auto& s : rule_.arcs[k].slots)
          if (s.is_var && !seen[s.var]) {
            seen[s.var] = true;
            bound_after[s.var] = k + 1;
          }
    }
    for (const auto* p : parts) {
      auto cg = compile_guard(*p);
      std::set<std::uint32_t> vs;
      cg.collect_vars(vs);
      std::size_t when = 0;
      for (auto v : vs) {
        if (bound_after[v] == SIZE_MAX)
          throw ValidationError(rule_.name + ": guard variable '" + rule_.vars[v].name + "' is not bound by an input");
        when = std::max(when, bound_after[v]);
      }
      rule_.guard_after[when].push_back(std::move(cg));
    }
  }

  void mark_fresh(const std::string& var) { fresh_names_.insert(var); }

  /// Classifies output-only variables into fresh and external ones.
  Rule finish() {
    if (rule_.guard_after.empty()) rule_.guard_after.assign(rule_.arcs.size() + 1, {});
    std::vector<bool> bound(rule_.vars.size(), false);
    for (const auto& a : rule_.arcs)
      for (const auto& s : a.slots)
        if (s.is_var) bound[s.var] = true;
    for (std::uint32_t v = 0; v < rule_.vars.size(); ++v) {
      bool is_fresh = fresh_names_.count(rule_.vars[v].name) > 0;
      if (bound[v] && is_fresh)
        throw ValidationError(rule_.name + ": fresh variable '" + rule_.vars[v].name + "' also occurs on an input");
      if (bound[v]) continue;
      (is_fresh ? rule_.fresh : rule_.external).push_back(v);
    }
    return std::move(rule_);
  }

  Rule& rule() { return rule_; }

 private:
  CompiledGuard compile_guard(const Guard& g) {
    CompiledGuard c;
    c.kind = g.kind;
    if (g.kind == Guard::Kind::Lit) {
      auto type_of = [&](const Term& t) -> std::optional<TypeId> {
        if (!t.is_var()) return t.value.type();
        auto it = index_.find(t.var);
        if (it == index_.end())
          throw ValidationError(rule_.name + ": guard variable '" + t.var + "' is not bound by an input");
        return rule_.vars[it->second].type;
      };
      auto lt = *type_of(g.lit.lhs);
      auto rt = *type_of(g.lit.rhs);
      if (lt != rt) throw TypeError(rule_.name + ": guard literal '" + g.lit.text() + "' compares different types");
      if (!types_.at(lt).supports(g.lit.pred))
        throw TypeError(rule_.name + ": predicate " + predicate_name(g.lit.pred) + " unavailable on " + types_.name(lt));
      c.pred = g.lit.pred;
      c.negated = g.lit.negated;
      c.lhs = slot(g.lit.lhs, lt, "guard");
      c.rhs = slot(g.lit.rhs, rt, "guard");
    }
    for (const auto& k : g.children) c.kids.push_back(compile_guard(k));
    return c;
  }

  const TypeDomain& types_;
  Rule rule_;
  std::map<std::string, std::uint32_t> index_;
  std::set<std::string> fresh_names_;
};

using SourceFn = std::function<std::span<const Bag::Entry>(std::uint32_t)>;
using UsedValuesFn = std::function<const std::set<Value>&()>;

/// Every value occurring in the given bags.
inline std::set<Value> values_in(std::initializer_list<const Bag*> bags) {
  std::set<Value> out;
  for (const auto* b : bags)
    for (const auto& e : b->entries())
      for (const auto& v : e.tuple()) out.insert(v);
  return out;
}

namespace detail {

template <class Emit>
class Matcher {
 public:
  Matcher(const Rule& r, const SourceFn& src, const FreshPolicy& fp, const TypeDomain& types, const UsedValuesFn& used,
          Emit& emit)
      : r_(r), src_(src), fp_(fp), types_(types), used_(used), emit_(emit), env_(r.vars.size()), set_(r.vars.size()) {}

  void run() {
    for (const auto& a : r_.arcs)
      if (src_(a.source).empty()) return;
    match(0);
  }

 private:
  bool guards(std::size_t k) const {
    for (const auto& g : r_.guard_after[k])
      if (!g.eval(env_)) return false;
    return true;
  }

  void match(std::size_t k) {
    if (!guards(k)) return;
    if (k == r_.arcs.size()) {
      externals(0);
      return;
    }
    const auto& arc = r_.arcs[k];
    for (const auto& e : src_(arc.source)) {
      if (arc.consume) {
        std::uint32_t taken = 0;
        for (const auto& [s, id] : consumed_)
          if (s == arc.source && id == e.id) ++taken;
        if (e.count <= taken) continue;
      }
      const auto& t = e.tuple();
      newly_.push_back(SIZE_MAX);  // frame marker
      bool ok = true;
      for (std::size_t i = 0; i < arc.slots.size() && ok; ++i) {
        const auto& s = arc.slots[i];
        if (!s.is_var) ok = s.value == t[i];
        else if (set_[s.var]) ok = env_[s.var] == t[i];
        else {
          env_[s.var] = t[i];
          set_[s.var] = true;
          newly_.push_back(s.var);
        }
      }
      if (ok) {
        if (arc.consume) consumed_.emplace_back(arc.source, e.id);
        match(k + 1);
        if (arc.consume) consumed_.pop_back();
      }
      while (newly_.back() != SIZE_MAX) {
        set_[newly_.back()] = false;
        newly_.pop_back();
      }
      newly_.pop_back();
    }
  }

  void externals(std::size_t i) {
    if (i == r_.external.size()) {
      freshes();
      return;
    }
    auto v = r_.external[i];
    const auto* dom = fp_.sample(r_.vars[v].type);
    if (!dom) return;
    for (const auto& o : *dom) {
      env_[v] = o;
      externals(i + 1);
    }
  }

  void freshes() {
    if (r_.fresh.empty()) {
      emit_(static_cast<const std::vector<Value>&>(env_));
      return;
    }
    std::vector<TypeId> ts;
    for (auto v : r_.fresh) ts.push_back(r_.vars[v].type);
    for (const auto& choice : fp_.fresh_choices(types_, ts, used_())) {
      for (std::size_t j = 0; j < r_.fresh.size(); ++j) env_[r_.fresh[j]] = choice[j];
      emit_(static_cast<const std::vector<Value>&>(env_));
    }
  }

  const Rule& r_;
  const SourceFn& src_;
  const FreshPolicy& fp_;
  const TypeDomain& types_;
  const UsedValuesFn& used_;
  Emit& emit_;
  std::vector<Value> env_;
  std::vector<bool> set_;
  std::vector<std::size_t> newly_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> consumed_;
};

}  // namespace detail

/// Calls emit(env) for each binding of the rule; env is indexed like r.vars.
template <class Emit>
void enumerate_bindings(const Rule& r, const SourceFn& src, const FreshPolicy& fp, const TypeDomain& types,
                        const UsedValuesFn& used, Emit&& emit) {
  detail::Matcher<std::remove_reference_t<Emit>> m(r, src, fp, types, used, emit);
  m.run();
}

}  // namespace dbnet
