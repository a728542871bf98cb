#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbnet/binding.hpp"
#include "dbnet/dbnet.hpp"
#include "dbnet/lts.hpp"

namespace dbnet {

enum class Priority : int { Low = 0, Normal = 1, High = 2 };

inline const char* priority_name(Priority p) {
  switch (p) {
    case Priority::Low: return "low";
    case Priority::Normal: return "normal";
    case Priority::High: return "high";
  }
  return "?";
}

inline std::optional<Priority> parse_priority(std::string_view s) {
  if (s == "low") return Priority::Low;
  if (s == "normal") return Priority::Normal;
  if (s == "high") return Priority::High;
  return std::nullopt;
}

/// Role of a place in a translated net.
enum class PlaceClass { Control, Relation, Lock, Aux };

inline const char* place_class_name(PlaceClass c) {
  switch (c) {
    case PlaceClass::Control: return "control";
    case PlaceClass::Relation: return "relation";
    case PlaceClass::Lock: return "lock";
    case PlaceClass::Aux: return "aux";
  }
  return "?";
}

inline std::optional<PlaceClass> parse_place_class(std::string_view s) {
  if (s == "control") return PlaceClass::Control;
  if (s == "relation") return PlaceClass::Relation;
  if (s == "lock") return PlaceClass::Lock;
  if (s == "aux") return PlaceClass::Aux;
  return std::nullopt;
}

struct CpnPlace {
  std::string name;
  std::vector<TypeId> color;
  PlaceClass cls = PlaceClass::Control;
  bool operator==(const CpnPlace&) const = default;
};

/// How firings of a transition appear in the LTS.
struct LabelSpec {
  enum class Kind { Default, Silent, Observable };
  Kind kind = Kind::Default;
  std::string source;   // observable: the transition name shown
  std::string outcome;  // observable: "commit" or "rollback"

  static LabelSpec silent() { return {Kind::Silent, {}, {}}; }
  static LabelSpec observable(std::string source, std::string outcome) {
    return {Kind::Observable, std::move(source), std::move(outcome)};
  }
  bool operator==(const LabelSpec&) const = default;
};

struct CpnTransition {
  std::string name;
  std::vector<NetArc> inputs;
  std::vector<NetArc> reads;  // tested, never consumed
  std::vector<NetArc> outputs;
  Guard guard;
  std::set<std::string> fresh;
  Priority priority = Priority::Normal;
  LabelSpec label;
  bool operator==(const CpnTransition&) const = default;
};

using Marking = Bag;

struct NuCpn {
  TypeDomain types;
  std::vector<CpnPlace> places;
  std::vector<CpnTransition> transitions;
  Marking initial;
  FreshPolicy policy;

  std::optional<std::uint32_t> place_index(std::string_view n) const {
    for (std::size_t i = 0; i < places.size(); ++i)
      if (places[i].name == n) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }
  std::optional<std::size_t> transition_index(std::string_view n) const {
    for (std::size_t i = 0; i < transitions.size(); ++i)
      if (transitions[i].name == n) return i;
    return std::nullopt;
  }
  std::uint32_t require_place(std::string_view n) const {
    auto p = place_index(n);
    if (!p) throw SchemaError("unknown place '" + std::string(n) + "'");
    return *p;
  }

  void add_token(Marking& m, std::string_view place, const Tuple& t, std::uint32_t n = 1) const {
    auto p = require_place(place);
    const auto& color = places[p].color;
    if (t.size() != color.size()) throw TypeError("token of wrong arity for place " + places[p].name);
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i].type() != color[i] || !t[i].fits(types.kind(color[i])))
        throw TypeError("token " + tuple_text(t) + " does not fit place " + places[p].name);
    m.add(p, t, n);
  }
};

inline StateText marking_text(const NuCpn& net, const Marking& m) {
  StateText t;
  for (const auto& e : m.entries())
    for (std::uint32_t i = 0; i < e.count; ++i) t.tokens.push_back(fact_text(net.places[e.slot].name, e.tuple()));
  std::sort(t.tokens.begin(), t.tokens.end());
  return t;
}

namespace detail {

inline Rule compile_cpn_transition(const NuCpn& net, const CpnTransition& t) {
  RuleBuilder b(t.name, net.types);
  auto place = [&](const NetArc& a, const char* what) {
    auto p = net.place_index(a.place);
    if (!p) throw SchemaError(t.name + ": unknown " + std::string(what) + " place '" + a.place + "'");
    return *p;
  };
  for (const auto& a : t.inputs) {
    auto p = place(a, "input");
    b.arc(p, a.terms, net.places[p].color, true, "place " + a.place);
  }
  for (const auto& a : t.reads) {
    auto p = place(a, "read");
    b.arc(p, a.terms, net.places[p].color, false, "place " + a.place);
  }
  b.guard(t.guard);
  for (const auto& a : t.outputs) {
    auto p = place(a, "output");
    b.output(p, a.terms, net.places[p].color, "place " + a.place);
  }
  for (const auto& f : t.fresh) {
    if (!b.known(f)) throw ValidationError(t.name + ": fresh variable '" + f + "' is never used");
    b.mark_fresh(f);
  }
  Rule r = b.finish();
  r.priority = static_cast<int>(t.priority);
  return r;
}

}  // namespace detail

inline std::vector<Violation> cpn_validate(const NuCpn& net) {
  std::vector<Violation> out;
  std::set<std::string> names;
  for (const auto& p : net.places)
    if (!names.insert(p.name).second) out.push_back({"place " + p.name, "duplicate place"});
  std::set<std::string> tnames;
  for (const auto& t : net.transitions) {
    std::string where = "transition " + t.name;
    if (!tnames.insert(t.name).second) out.push_back({where, "duplicate transition"});
    try {
      auto r = detail::compile_cpn_transition(net, t);
      for (auto v : r.external)
        if (!net.policy.sample(r.vars[v].type))
          out.push_back({where, "external variable '" + r.vars[v].name + "' of type " + net.types.name(r.vars[v].type) +
                                    " has no sample domain"});
    } catch (const Error& e) {
      out.push_back({where, e.what()});
    }
  }
  for (const auto& e : net.initial.entries()) {
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

struct CpnBinding {
  std::size_t transition;
  std::vector<Value> env;
};

/// Compiled ν-CPN semantics with global priority filtering.
class CpnEngine {
 public:
  CpnEngine(const NuCpn& net, FreshPolicy fp, std::map<std::string, LabelSpec> overrides = {})
      : net_(net), fp_(std::move(fp)), overrides_(std::move(overrides)) {
    auto v = cpn_validate(net);
    if (!v.empty()) {
      std::string msg = "invalid net:";
      for (const auto& x : v) msg += "\n  " + x.text();
      throw ValidationError(msg);
    }
    for (const auto& t : net.transitions) rules_.push_back(detail::compile_cpn_transition(net, t));
  }
  explicit CpnEngine(const NuCpn& net) : CpnEngine(net, net.policy) {}

  const NuCpn& net() const { return net_; }
  const Rule& rule(std::size_t t) const { return rules_[t]; }

  /// Bindings enabled by tokens and guards, ignoring priorities.
  std::vector<CpnBinding> token_enabled(const Marking& m) const {
    std::vector<CpnBinding> out;
    SourceFn src = [&](std::uint32_t i) { return m.range(i); };
    std::optional<std::set<Value>> used;
    UsedValuesFn used_fn = [&]() -> const std::set<Value>& {
      if (!used) used = values_in({&m});
      return *used;
    };
    for (std::size_t t = 0; t < rules_.size(); ++t)
      enumerate_bindings(rules_[t], src, fp_, net_.types, used_fn,
                         [&](const std::vector<Value>& env) { out.push_back({t, env}); });
    return out;
  }

  /// Token-enabled bindings of the highest priority level present.
  std::vector<CpnBinding> enabled(const Marking& m) const {
    auto all = token_enabled(m);
    int top = -1;
    for (const auto& b : all) top = std::max(top, rules_[b.transition].priority);
    std::vector<CpnBinding> out;
    for (auto& b : all)
      if (rules_[b.transition].priority == top) out.push_back(std::move(b));
    return out;
  }

  Marking fire_env(const Marking& m, std::size_t t, const std::vector<Value>& env) const {
    Marking next = m;
    const auto& r = rules_[t];
    for (const auto& a : r.arcs)
      if (a.consume) {
        Tuple tok;
        for (const auto& s : a.slots) tok.push_back(s.get(env));
        if (!next.remove(a.source, tok)) throw ContractError(r.name + ": input token missing");
      }
    for (const auto& o : r.outputs) next.add(o.target, o.instantiate(env));
    return next;
  }

  Marking fire(const Marking& m, std::size_t t, const Substitution& theta) const {
    if (t >= rules_.size()) throw ContractError("no transition with index " + std::to_string(t));
    for (const auto& b : enabled(m))
      if (b.transition == t && rules_[t].substitution(b.env) == theta) return fire_env(m, t, b.env);
    throw ContractError(net_.transitions[t].name + " is not enabled under {" + substitution_text(theta) + "}");
  }

  const LabelSpec& label_spec(std::size_t t) const {
    auto it = overrides_.find(net_.transitions[t].name);
    return it != overrides_.end() ? it->second : net_.transitions[t].label;
  }

  /// Empty for silent firings.
  std::string label(std::size_t t, const std::vector<Value>& env) const {
    const auto& spec = label_spec(t);
    switch (spec.kind) {
      case LabelSpec::Kind::Silent: return {};
      case LabelSpec::Kind::Observable: return spec.source + "[" + rules_[t].binding_text(env) + "]/" + spec.outcome;
      case LabelSpec::Kind::Default: break;
    }
    return net_.transitions[t].name + "[" + rules_[t].binding_text(env) + "]";
  }

  std::vector<Step<Marking>> successors(const Marking& m) const {
    std::vector<Step<Marking>> out;
    for (const auto& b : enabled(m))
      out.push_back({label(b.transition, b.env), static_cast<std::uint32_t>(b.transition), fire_env(m, b.transition, b.env)});
    return out;
  }

  Lts<Marking> build_lts(const Marking& m0, const Limits& limits) const {
    struct H {
      std::size_t operator()(const Marking& m) const { return m.hash(); }
    };
    return explore<Marking, H>(m0, [&](const Marking& m) { return successors(m); }, limits);
  }

 private:
  const NuCpn& net_;
  FreshPolicy fp_;
  std::map<std::string, LabelSpec> overrides_;
  std::vector<Rule> rules_;
};

inline std::vector<std::pair<std::string, Substitution>> cpn_enabled(const NuCpn& net, const Marking& m,
                                                                     const FreshPolicy& fp) {
  CpnEngine e(net, fp);
  std::vector<std::pair<std::string, Substitution>> out;
  for (const auto& b : e.enabled(m)) out.emplace_back(net.transitions[b.transition].name, e.rule(b.transition).substitution(b.env));
  return out;
}

inline Marking cpn_fire(const NuCpn& net, const Marking& m, std::string_view t, const Substitution& theta,
                        const FreshPolicy& fp) {
  auto idx = net.transition_index(t);
  if (!idx) throw SchemaError("unknown transition '" + std::string(t) + "'");
  return CpnEngine(net, fp).fire(m, *idx, theta);
}

inline Marking cpn_fire(const NuCpn& net, const Marking& m, std::string_view t, const Substitution& theta) {
  return cpn_fire(net, m, t, theta, net.policy);
}

inline Lts<Marking> cpn_build_lts(const NuCpn& net, const FreshPolicy& fp, const Limits& limits,
                                  std::map<std::string, LabelSpec> overrides = {}) {
  return CpnEngine(net, fp, std::move(overrides)).build_lts(net.initial, limits);
}

}  // namespace dbnet
