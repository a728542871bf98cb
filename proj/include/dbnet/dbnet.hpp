#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbnet/binding.hpp"
#include "dbnet/fresh.hpp"
#include "dbnet/lts.hpp"
#include "dbnet/query.hpp"
#include "dbnet/relational.hpp"

namespace dbnet {

struct ControlPlace {
  std::string name;
  std::vector<TypeId> color;
  bool operator==(const ControlPlace&) const = default;
};

struct ViewPlace {
  std::string name;
  std::vector<TypeId> color;
  std::string query;
  bool operator==(const ViewPlace&) const = default;
};

struct NetArc {
  std::string place;
  std::vector<Term> terms;
  bool operator==(const NetArc&) const = default;
};

struct ActionBinding {
  std::string action;
  std::vector<Term> args;
  bool operator==(const ActionBinding&) const = default;
};

struct DbTransition {
  std::string name;
  std::vector<NetArc> inputs;     // consumed from control places
  std::vector<NetArc> reads;      // view places, never consumed
  std::vector<NetArc> outputs;    // normal output flow
  std::vector<NetArc> rollbacks;  // emitted instead of outputs when the action rolls back
  Guard guard;
  std::optional<ActionBinding> action;
  std::set<std::string> fresh;  // ν-variables
  bool operator==(const DbTransition&) const = default;
};

/// Database instance plus control marking (slots are control place indices).
struct Snapshot {
  Instance instance;
  Bag marking;

  friend bool operator==(const Snapshot& a, const Snapshot& b) {
    return a.instance == b.instance && a.marking == b.marking;
  }
};

struct SnapshotHash {
  std::size_t operator()(const Snapshot& s) const { return s.instance.hash() * 31 + s.marking.hash(); }
};

struct DbNet {
  std::shared_ptr<const Schema> schema = std::make_shared<Schema>();
  std::vector<UcqQuery> queries;
  std::vector<Action> actions;
  std::vector<ControlPlace> places;
  std::vector<ViewPlace> views;
  std::vector<DbTransition> transitions;
  FreshPolicy policy;
  Snapshot initial;

  const TypeDomain& types() const { return schema->types; }

  std::optional<std::uint32_t> place_index(std::string_view n) const {
    for (std::size_t i = 0; i < places.size(); ++i)
      if (places[i].name == n) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }
  std::optional<std::uint32_t> view_index(std::string_view n) const {
    for (std::size_t i = 0; i < views.size(); ++i)
      if (views[i].name == n) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }
  const UcqQuery* query(std::string_view n) const {
    for (const auto& q : queries)
      if (q.name == n) return &q;
    return nullptr;
  }
  const Action* action(std::string_view n) const {
    for (const auto& a : actions)
      if (a.name == n) return &a;
    return nullptr;
  }
  std::optional<std::size_t> transition_index(std::string_view n) const {
    for (std::size_t i = 0; i < transitions.size(); ++i)
      if (transitions[i].name == n) return i;
    return std::nullopt;
  }

  /// An empty snapshot over this net's schema.
  Snapshot empty_snapshot() const { return Snapshot{Instance(schema), {}}; }

  void add_token(Snapshot& s, std::string_view place, const Tuple& t, std::uint32_t n = 1) const {
    auto p = place_index(place);
    if (!p) throw SchemaError("unknown control place '" + std::string(place) + "'");
    const auto& color = places[*p].color;
    if (t.size() != color.size()) throw TypeError("token of wrong arity for place " + places[*p].name);
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i].type() != color[i] || !t[i].fits(types().kind(color[i])))
        throw TypeError("token " + tuple_text(t) + " does not fit place " + places[*p].name);
    s.marking.add(*p, t, n);
  }
};

struct Violation {
  std::string where;
  std::string message;
  std::string text() const { return where + ": " + message; }
};

inline std::string outcome_text(Outcome o) { return o == Outcome::Committed ? "commit" : "rollback"; }

/// `T[var=val,...]/commit` or `.../rollback`.
inline std::string firing_label(const std::string& transition, const std::string& binding, Outcome o) {
  return transition + "[" + binding + "]/" + outcome_text(o);
}

/// Canonical text of a snapshot; tokens repeat once per copy.
inline StateText snapshot_text(const DbNet& net, const Snapshot& s) {
  StateText t;
  t.facts = s.instance.lines();
  for (const auto& e : s.marking.entries())
    for (std::uint32_t i = 0; i < e.count; ++i) t.tokens.push_back(fact_text(net.places[e.slot].name, e.tuple()));
  std::sort(t.tokens.begin(), t.tokens.end());
  return t;
}

namespace detail {

struct CompiledDbTransition {
  Rule rule;
  std::size_t normal_outputs = 0;  // rule.outputs = normal flow, then rollback flow
  const Action* action = nullptr;
  std::vector<Slot> action_args;
};

inline CompiledDbTransition compile_db_transition(const DbNet& net, const DbTransition& t) {
  const auto& types = net.types();
  RuleBuilder b(t.name, types);
  auto P = static_cast<std::uint32_t>(net.places.size());
  for (const auto& a : t.inputs) {
    auto p = net.place_index(a.place);
    if (!p) {
      if (net.view_index(a.place)) throw ValidationError(t.name + ": view place " + a.place + " used as a consuming input");
      throw SchemaError(t.name + ": unknown input place '" + a.place + "'");
    }
    b.arc(*p, a.terms, net.places[*p].color, true, "place " + a.place);
  }
  for (const auto& a : t.reads) {
    auto v = net.view_index(a.place);
    if (!v) throw SchemaError(t.name + ": read arc to '" + a.place + "', which is not a view place");
    b.arc(P + *v, a.terms, net.views[*v].color, false, "view " + a.place);
  }
  b.guard(t.guard);
  CompiledDbTransition out;
  auto produce = [&](const std::vector<NetArc>& arcs, const char* what) {
    for (const auto& a : arcs) {
      auto p = net.place_index(a.place);
      if (!p) {
        if (net.view_index(a.place)) throw ValidationError(t.name + ": " + what + " flow targets view place " + a.place);
        throw SchemaError(t.name + ": unknown " + std::string(what) + " place '" + a.place + "'");
      }
      b.output(*p, a.terms, net.places[*p].color, "place " + a.place);
    }
  };
  produce(t.outputs, "output");
  out.normal_outputs = t.outputs.size();
  produce(t.rollbacks, "rollback");
  if (t.action) {
    out.action = net.action(t.action->action);
    if (!out.action) throw SchemaError(t.name + ": unknown action '" + t.action->action + "'");
    std::vector<TypeId> ptypes;
    for (const auto& p : out.action->params) ptypes.push_back(p.type);
    out.action_args = b.slots(t.action->args, ptypes, "action " + t.action->action);
  } else if (!t.rollbacks.empty()) {
    throw ValidationError(t.name + ": rollback flow without an action");
  }
  for (const auto& f : t.fresh) {
    if (!b.known(f)) throw ValidationError(t.name + ": fresh variable '" + f + "' is never used");
    b.mark_fresh(f);
  }
  out.rule = b.finish();
  return out;
}

}  // namespace detail

/// Every structural problem of the net, its schema and its initial snapshot.
inline std::vector<Violation> validate(const DbNet& net) {
  std::vector<Violation> out;
  const auto& schema = *net.schema;
  for (const auto& p : schema.validate()) out.push_back({"schema", p});
  std::set<std::string> names;
  for (const auto& q : net.queries) {
    if (!names.insert("query " + q.name).second) out.push_back({"query " + q.name, "duplicate query"});
    for (const auto& p : query_problems(schema, q)) out.push_back({"query " + q.name, p});
  }
  for (const auto& a : net.actions) {
    if (!names.insert("action " + a.name).second) out.push_back({"action " + a.name, "duplicate action"});
    for (const auto& p : validate_action(schema, a)) out.push_back({"action " + a.name, p});
  }
  std::set<std::string> place_names;
  for (const auto& p : net.places)
    if (!place_names.insert(p.name).second) out.push_back({"place " + p.name, "duplicate place"});
  for (const auto& v : net.views) {
    if (!place_names.insert(v.name).second) out.push_back({"view " + v.name, "duplicate place"});
    const auto* q = net.query(v.query);
    if (!q) {
      out.push_back({"view " + v.name, "unknown query '" + v.query + "'"});
      continue;
    }
    auto r = validate_view_query(*q, v.color, &schema.types);
    for (const auto& p : r.problems) out.push_back({"view " + v.name, "view color mismatch: " + p});
  }
  std::set<std::string> tnames;
  for (const auto& t : net.transitions) {
    std::string where = "transition " + t.name;
    if (!tnames.insert(t.name).second) out.push_back({where, "duplicate transition"});
    auto check_names = [&](const std::vector<NetArc>& arcs) {
      for (const auto& a : arcs)
        for (const auto& term : a.terms)
          if (term.is_var() && term.var.rfind("__", 0) == 0)
            out.push_back({where, "variable '" + term.var + "' uses the reserved prefix __"});
    };
    check_names(t.inputs);
    check_names(t.reads);
    check_names(t.outputs);
    check_names(t.rollbacks);
    std::set<std::string> input_vars;
    for (const auto* arcs : {&t.inputs, &t.reads})
      for (const auto& a : *arcs)
        for (const auto& term : a.terms)
          if (term.is_var()) input_vars.insert(term.var);
    for (const auto& v : t.guard.vars())
      if (!input_vars.count(v)) out.push_back({where, "guard-scope violation: variable '" + v + "' is not on an input"});
    try {
      auto c = detail::compile_db_transition(net, t);
      for (auto v : c.rule.external) {
        auto ty = c.rule.vars[v].type;
        if (!net.policy.sample(ty))
          out.push_back({where, "external variable '" + c.rule.vars[v].name + "' of type " + schema.types.name(ty) +
                                    " has no sample domain"});
      }
    } catch (const Error& e) {
      std::string msg = e.what();
      if (msg.find("guard variable") == std::string::npos) out.push_back({where, msg});
    }
  }
  if (net.initial.instance.schema_ptr() != net.schema)
    out.push_back({"initial", "instance uses a different schema"});
  for (auto i : violated_constraints(net.initial.instance))
    out.push_back({"initial", "violates " + schema.describe(schema.constraints[i])});
  for (const auto& e : net.initial.marking.entries()) {
    if (e.slot >= net.places.size()) {
      out.push_back({"initial", "token on unknown place"});
      continue;
    }
    const auto& color = net.places[e.slot].color;
    const auto& t = e.tuple();
    bool ok = t.size() == color.size();
    for (std::size_t i = 0; ok && i < t.size(); ++i) ok = t[i].type() == color[i];
    if (!ok) out.push_back({"initial", "token " + tuple_text(t) + " does not fit place " + net.places[e.slot].name});
  }
  return out;
}

inline void require_valid(const DbNet& net) {
  auto v = validate(net);
  if (v.empty()) return;
  std::string msg = "invalid net:";
  for (const auto& x : v) msg += "\n  " + x.text();
  throw ValidationError(msg);
}

struct FireResult {
  Snapshot next;
  std::string label;
  Outcome outcome;
};

/// Compiled DB-net semantics over snapshots.
class DbNetEngine {
 public:
  DbNetEngine(const DbNet& net, FreshPolicy fp) : net_(net), fp_(std::move(fp)) {
    require_valid(net);
    for (const auto& t : net.transitions) compiled_.push_back(detail::compile_db_transition(net, t));
    std::set<std::string> read_views;
    for (const auto& t : net.transitions)
      for (const auto& r : t.reads) read_views.insert(r.place);
    for (std::size_t v = 0; v < net.views.size(); ++v)
      if (read_views.count(net.views[v].name)) used_views_.push_back(static_cast<std::uint32_t>(v));
  }
  explicit DbNetEngine(const DbNet& net) : DbNetEngine(net, net.policy) {}

  const DbNet& net() const { return net_; }
  const FreshPolicy& policy() const { return fp_; }

  /// View contents as a bag whose slots are view indices.
  Bag materialize_views(const Instance& inst) const {
    Bag b;
    for (auto v : used_views_) {
      auto ans = eval_ucq(*net_.query(net_.views[v].query), inst);
      for (const auto& row : ans.rows) b.add(v, row);
    }
    return b;
  }

  /// Calls emit(t, env) for every enabled binding of every transition.
  template <class Emit>
  void for_each_binding(const Snapshot& s, Emit&& emit, std::optional<std::size_t> only = std::nullopt) const {
    Bag views = materialize_views(s.instance);
    auto P = static_cast<std::uint32_t>(net_.places.size());
    SourceFn src = [&](std::uint32_t i) { return i < P ? s.marking.range(i) : views.range(i - P); };
    std::optional<std::set<Value>> used;
    UsedValuesFn used_fn = [&]() -> const std::set<Value>& {
      if (!used) used = values_in({&s.instance.bag(), &s.marking});
      return *used;
    };
    for (std::size_t t = 0; t < compiled_.size(); ++t) {
      if (only && *only != t) continue;
      enumerate_bindings(compiled_[t].rule, src, fp_, net_.types(), used_fn,
                         [&](const std::vector<Value>& env) { emit(t, env); });
    }
  }

  std::vector<Substitution> enabled_bindings(const Snapshot& s, std::size_t t) const {
    std::vector<Substitution> out;
    for_each_binding(
        s, [&](std::size_t, const std::vector<Value>& env) { out.push_back(compiled_[t].rule.substitution(env)); }, t);
    return out;
  }

  FireResult fire_env(const Snapshot& s, std::size_t t, const std::vector<Value>& env) const {
    const auto& c = compiled_[t];
    FireResult r{s, {}, Outcome::Committed};
    for (const auto& a : c.rule.arcs)
      if (a.consume) {
        Tuple tok;
        for (const auto& sl : a.slots) tok.push_back(sl.get(env));
        if (!r.next.marking.remove(a.source, tok)) throw ContractError(net_.transitions[t].name + ": input token missing");
      }
    if (c.action) {
      Substitution theta;
      for (std::size_t i = 0; i < c.action->params.size(); ++i) theta[c.action->params[i].name] = c.action_args[i].get(env);
      auto res = apply_action(s.instance, *c.action, theta);
      r.outcome = res.outcome;
      r.next.instance = std::move(res.instance);
    }
    std::size_t from = r.outcome == Outcome::Committed ? 0 : c.normal_outputs;
    std::size_t to = r.outcome == Outcome::Committed ? c.normal_outputs : c.rule.outputs.size();
    for (std::size_t i = from; i < to; ++i) {
      const auto& o = c.rule.outputs[i];
      r.next.marking.add(o.target, o.instantiate(env));
    }
    r.label = firing_label(c.rule.name, c.rule.binding_text(env), r.outcome);
    return r;
  }

  /// Fires t under theta; theta must be one of the enabled bindings.
  FireResult fire(const Snapshot& s, std::size_t t, const Substitution& theta) const {
    if (t >= compiled_.size()) throw ContractError("no transition with index " + std::to_string(t));
    std::optional<std::vector<Value>> chosen;
    for_each_binding(
        s,
        [&](std::size_t, const std::vector<Value>& env) {
          if (!chosen && compiled_[t].rule.substitution(env) == theta) chosen = env;
        },
        t);
    if (!chosen)
      throw ContractError(net_.transitions[t].name + " is not enabled under {" + substitution_text(theta) + "}");
    return fire_env(s, t, *chosen);
  }

  std::vector<Step<Snapshot>> successors(const Snapshot& s) const {
    std::vector<Step<Snapshot>> out;
    for_each_binding(s, [&](std::size_t t, const std::vector<Value>& env) {
      auto r = fire_env(s, t, env);
      out.push_back({std::move(r.label), static_cast<std::uint32_t>(t), std::move(r.next)});
    });
    return out;
  }

  Lts<Snapshot> build_lts(const Snapshot& s0, const Limits& limits) const {
    return explore<Snapshot, SnapshotHash>(s0, [&](const Snapshot& s) { return successors(s); }, limits);
  }

  const detail::CompiledDbTransition& compiled(std::size_t t) const { return compiled_[t]; }

 private:
  const DbNet& net_;
  FreshPolicy fp_;
  std::vector<detail::CompiledDbTransition> compiled_;
  std::vector<std::uint32_t> used_views_;
};

inline std::vector<Substitution> enabled_bindings(const DbNet& net, const Snapshot& s, std::string_view t,
                                                  const FreshPolicy& fp) {
  auto idx = net.transition_index(t);
  if (!idx) throw SchemaError("unknown transition '" + std::string(t) + "'");
  return DbNetEngine(net, fp).enabled_bindings(s, *idx);
}

inline FireResult fire(const DbNet& net, const Snapshot& s, std::string_view t, const Substitution& theta,
                       const FreshPolicy& fp) {
  auto idx = net.transition_index(t);
  if (!idx) throw SchemaError("unknown transition '" + std::string(t) + "'");
  return DbNetEngine(net, fp).fire(s, *idx, theta);
}

inline FireResult fire(const DbNet& net, const Snapshot& s, std::string_view t, const Substitution& theta) {
  return fire(net, s, t, theta, net.policy);
}

inline Lts<Snapshot> build_lts(const DbNet& net, const Snapshot& s0, const FreshPolicy& fp, const Limits& limits) {
  return DbNetEngine(net, fp).build_lts(s0, limits);
}

}  // namespace dbnet
