#pragma once

// Elaboration of a parsed model file into a DbNet or a NuCpn, and the way
// back from a NuCpn to printable syntax.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbnet/dbnet.hpp"
#include "dbnet/dsl/parser.hpp"
#include "dbnet/dsl/syntax.hpp"
#include "dbnet/nucpn.hpp"

namespace dbnet::dsl {

using ParamOverrides = std::map<std::string, std::int64_t>;

namespace detail {

inline std::string at(SourceLoc loc) { return std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": "; }

inline TypeId resolve_type(const TypeDomain& types, const std::string& name, SourceLoc loc) {
  auto t = types.find(name);
  if (!t) throw SchemaError(at(loc) + "unknown type '" + name + "'");
  return *t;
}

inline std::vector<TypeId> resolve_types(const TypeDomain& types, const std::vector<std::string>& names, SourceLoc loc) {
  std::vector<TypeId> out;
  for (const auto& n : names) out.push_back(resolve_type(types, n, loc));
  return out;
}

/// A literal read at the given type.
inline Value typed_value(const TypeDomain& types, const Lit& l, TypeId t, SourceLoc loc) {
  auto kind = types.kind(t);
  auto bad = [&] {
    return TypeError(at(loc) + "constant " + l.print() + " does not fit type " + types.name(t));
  };
  switch (l.kind) {
    case Lit::Kind::Null: return Value::null(t);
    case Lit::Kind::Int:
      if (kind == DataKind::Integer) return Value::integer(std::stoll(l.text), t);
      if (kind == DataKind::Real) return Value::real(l.text, t);
      throw bad();
    case Lit::Kind::Real:
      if (kind == DataKind::Real) return Value::real(l.text, t);
      throw bad();
    case Lit::Kind::Str:
      if (kind == DataKind::String) return Value::string(l.text, t);
      throw bad();
    case Lit::Kind::Bool:
      if (kind == DataKind::Bool) return Value::boolean(l.text == "true", t);
      throw bad();
  }
  throw bad();
}

/// A literal with no typing context takes the standard type of its shape.
inline Value default_value(const Lit& l, SourceLoc loc) {
  switch (l.kind) {
    case Lit::Kind::Int: return Value::integer(std::stoll(l.text));
    case Lit::Kind::Real: return Value::real(l.text);
    case Lit::Kind::Str: return Value::string(l.text);
    case Lit::Kind::Bool: return Value::boolean(l.text == "true");
    case Lit::Kind::Null: break;
  }
  throw TypeError(at(loc) + "cannot tell the type of null here");
}

inline Term typed_term(const TypeDomain& types, const STerm& t, TypeId want, SourceLoc loc) {
  if (t.is_var) return Term::variable(t.name);
  return Term::constant(typed_value(types, t.lit, want, loc));
}

using VarTypes = std::map<std::string, TypeId>;

inline void note_vars(VarTypes& vars, const SAtom& a, const std::vector<TypeId>& color) {
  for (std::size_t i = 0; i < a.args.size() && i < color.size(); ++i)
    if (a.args[i].is_var) vars.emplace(a.args[i].name, color[i]);
}

inline std::vector<Term> typed_terms(const TypeDomain& types, const SAtom& a, const std::vector<TypeId>& color,
                                     SourceLoc loc, const std::string& what) {
  if (a.args.size() != color.size())
    throw TypeError(at(loc) + what + " " + a.name + " expects " + std::to_string(color.size()) + " arguments, got " +
                    std::to_string(a.args.size()));
  std::vector<Term> out;
  for (std::size_t i = 0; i < a.args.size(); ++i) out.push_back(typed_term(types, a.args[i], color[i], loc));
  return out;
}

inline Literal typed_literal(const TypeDomain& types, const SLiteral& l, const VarTypes& vars, SourceLoc loc) {
  auto type_of = [&](const STerm& t) -> std::optional<TypeId> {
    if (!t.is_var) return std::nullopt;
    auto it = vars.find(t.name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
  auto lt = type_of(l.lhs), rt = type_of(l.rhs);
  auto side = [&](const STerm& t, std::optional<TypeId> other) -> Term {
    if (t.is_var) return Term::variable(t.name);
    if (other) return Term::constant(typed_value(types, t.lit, *other, loc));
    if (l.pred == Predicate::Succ) return Term::constant(typed_value(types, t.lit, TypeDomain::Int, loc));
    return Term::constant(default_value(t.lit, loc));
  };
  return {l.pred, side(l.lhs, rt), side(l.rhs, lt), l.negated};
}

inline Guard typed_guard(const TypeDomain& types, const SGuard& g, const VarTypes& vars, SourceLoc loc) {
  switch (g.kind) {
    case SGuard::Kind::True: return Guard::truth();
    case SGuard::Kind::Lit: return Guard::literal(typed_literal(types, g.lit, vars, loc));
    case SGuard::Kind::Not: return Guard::negation(typed_guard(types, g.kids[0], vars, loc));
    case SGuard::Kind::And: {
      std::vector<Guard> kids;
      for (const auto& k : g.kids) kids.push_back(typed_guard(types, k, vars, loc));
      return Guard{Guard::Kind::And, {}, std::move(kids)};
    }
  }
  return Guard::truth();
}

inline void declare_types(TypeDomain& types, const ModelFile& m) {
  for (const auto& t : m.types) {
    auto k = parse_kind(t.kind);
    if (!k) throw ValidationError("type " + t.name + ": unknown data kind '" + t.kind + "'");
    types.add(t.name, *k);
  }
}

inline std::map<std::string, std::int64_t> resolve_params(const ModelFile& m, const ParamOverrides& overrides) {
  std::map<std::string, std::int64_t> out;
  for (const auto& p : m.params)
    if (!out.emplace(p.name, p.value).second) throw ValidationError("duplicate parameter '" + p.name + "'");
  for (const auto& [k, v] : overrides) {
    auto it = out.find(k);
    if (it == out.end()) throw ValidationError("the model has no parameter '" + k + "'");
    it->second = v;
  }
  return out;
}

inline FreshPolicy elaborate_policy(const TypeDomain& types, const SPolicy& p) {
  FreshPolicy fp;
  if (p.fresh) fp.set_mode(*p.fresh);
  auto domain = [&](const SDomainList& d) {
    auto t = resolve_type(types, d.type, {});
    std::vector<Value> vs;
    for (const auto& l : d.values) vs.push_back(typed_value(types, l, t, {}));
    return std::make_pair(t, vs);
  };
  for (const auto& s : p.samples) fp.samples.insert(domain(s));
  for (const auto& s : p.reservoirs) fp.reservoirs.insert(domain(s));
  return fp;
}

/// Runs the initial block; `emit(kind, atom, count, loc)` receives ground atoms
/// whose variables were replaced by loop variables and parameters.
template <class Emit>
void run_initial(const std::vector<SInitStmt>& stmts, std::map<std::string, std::int64_t> env, Emit&& emit) {
  auto interpolate = [&](const std::string& s, SourceLoc loc) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '{') {
        auto j = s.find('}', i);
        if (j == std::string::npos) throw ValidationError(at(loc) + "unclosed '{' in string");
        auto name = s.substr(i + 1, j - i - 1);
        auto it = env.find(name);
        if (it == env.end()) throw ValidationError(at(loc) + "unknown name '" + name + "' in string");
        out += std::to_string(it->second);
        i = j;
      } else {
        out += s[i];
      }
    }
    return out;
  };
  for (const auto& s : stmts) {
    if (s.kind == SInitStmt::Kind::For) {
      auto bound = [&](const SBound& b) {
        if (!b.is_param) return b.value;
        auto it = env.find(b.param);
        if (it == env.end()) throw ValidationError(at(s.loc) + "unknown loop bound '" + b.param + "'");
        return it->second;
      };
      auto lo = bound(s.lo), hi = bound(s.hi);
      for (auto i = lo; i <= hi; ++i) {
        auto inner = env;
        inner[s.var] = i;
        run_initial(s.body, inner, emit);
      }
      continue;
    }
    SAtom ground{s.atom.name, {}};
    for (const auto& a : s.atom.args) {
      if (a.is_var) {
        auto it = env.find(a.name);
        if (it == env.end()) throw ValidationError(at(s.loc) + "unknown name '" + a.name + "' in initial marking");
        ground.args.push_back(STerm::constant({Lit::Kind::Int, std::to_string(it->second)}));
      } else if (a.lit.kind == Lit::Kind::Str) {
        ground.args.push_back(STerm::constant({Lit::Kind::Str, interpolate(a.lit.text, s.loc)}));
      } else {
        ground.args.push_back(a);
      }
    }
    emit(s.kind, ground, s.count, s.loc);
  }
}

inline Tuple ground_tuple(const TypeDomain& types, const SAtom& a, const std::vector<TypeId>& color, SourceLoc loc,
                          const std::string& what) {
  Tuple t;
  for (const auto& term : typed_terms(types, a, color, loc, what)) t.push_back(term.value);
  return t;
}

}  // namespace detail

/// Rejects empty models and names declared twice within one namespace.
inline void check_model(const ModelFile& m) {
  if (m.params.empty() && m.types.empty() && m.relations.empty() && m.queries.empty() && m.actions.empty() &&
      m.places.empty() && m.views.empty() && m.transitions.empty())
    throw ValidationError("empty model: nothing is declared");
  auto unique = [](const char* what, auto&& items, auto&& name_of) {
    std::map<std::string, SourceLoc> seen;
    for (const auto& it : items) {
      SourceLoc loc{};
      if constexpr (requires { it.loc; }) loc = it.loc;
      auto [pos, fresh] = seen.emplace(name_of(it), loc);
      if (!fresh)
        throw ValidationError(detail::at(loc) + "duplicate " + what + " '" + pos->first + "' (first declared at " +
                              std::to_string(pos->second.line) + ":" + std::to_string(pos->second.column) + ")");
    }
  };
  auto by_name = [](const auto& x) { return x.name; };
  unique("parameter", m.params, by_name);
  unique("type", m.types, by_name);
  unique("relation", m.relations, by_name);
  unique("query", m.queries, by_name);
  unique("action", m.actions, by_name);
  unique("transition", m.transitions, by_name);
  std::vector<SPlace> places = m.places;
  for (const auto& v : m.views) places.push_back({v.name, v.types, "view", v.loc});
  unique("place", places, by_name);
}

inline DbNet elaborate_dbnet(const ModelFile& m, const ParamOverrides& overrides = {}) {
  using namespace detail;
  check_model(m);
  auto params = resolve_params(m, overrides);
  auto schema = std::make_shared<Schema>();
  declare_types(schema->types, m);
  const auto& types = schema->types;

  for (const auto& r : m.relations) {
    RelationSchema rs{r.name, {}};
    for (const auto& a : r.attrs) rs.attributes.push_back({a.name, resolve_type(types, a.type, r.loc), a.key});
    try {
      schema->add_relation(std::move(rs));
    } catch (const Error& e) {
      throw ValidationError(at(r.loc) + e.what());
    }
  }
  auto column = [&](const std::string& rel, const std::string& col, SourceLoc loc) {
    auto r = schema->find(rel);
    if (!r) throw SchemaError(at(loc) + "unknown relation '" + rel + "'");
    auto c = schema->relation(*r).column(col);
    if (!c) throw SchemaError(at(loc) + "relation " + rel + " has no attribute '" + col + "'");
    return *c;
  };
  for (const auto& f : m.foreign_keys) {
    ForeignKey fk{f.source, {}, f.target, {}};
    for (const auto& c : f.source_cols) fk.source_columns.push_back(column(f.source, c, f.loc));
    for (const auto& c : f.target_cols) fk.target_columns.push_back(column(f.target, c, f.loc));
    try {
      schema->add_constraint(fk);
    } catch (const Error& e) {
      throw ValidationError(at(f.loc) + e.what());
    }
  }
  for (const auto& d : m.domains) {
    auto col = column(d.relation, d.column, d.loc);
    DomainConstraint dc{d.relation, col, {}};
    auto t = schema->relation(d.relation).attributes[col].type;
    for (const auto& v : d.values) dc.allowed.push_back(typed_value(types, v, t, d.loc));
    schema->add_constraint(dc);
  }

  DbNet net;
  net.schema = schema;
  auto relation_color = [&](const std::string& rel, SourceLoc loc) {
    auto r = schema->find(rel);
    if (!r) throw SchemaError(at(loc) + "unknown relation '" + rel + "'");
    return schema->relation(*r).types();
  };

  for (const auto& sq : m.queries) {
    UcqQuery q{sq.name, {}, {}};
    for (const auto& p : sq.params) q.free_vars.push_back({p.name, resolve_type(types, p.type, sq.loc)});
    for (const auto& items : sq.disjuncts) {
      Conjunct c;
      VarTypes vars;
      for (const auto& v : q.free_vars) vars.emplace(v.name, v.type);
      for (const auto& it : items)
        if (it.is_atom) note_vars(vars, it.atom, relation_color(it.atom.name, sq.loc));
      for (const auto& it : items) {
        if (it.is_atom) {
          c.atoms.push_back({it.atom.name, typed_terms(types, it.atom, relation_color(it.atom.name, sq.loc), sq.loc,
                                                       "relation")});
        } else {
          c.filters.push_back(typed_literal(types, it.lit, vars, sq.loc));
        }
      }
      q.disjuncts.push_back(std::move(c));
    }
    infer_existentials(*schema, q);
    net.queries.push_back(std::move(q));
  }

  for (const auto& sa : m.actions) {
    Action a{sa.name, {}, {}, {}};
    VarTypes vars;
    for (const auto& p : sa.params) {
      a.params.push_back({p.name, resolve_type(types, p.type, sa.loc)});
      vars.emplace(p.name, a.params.back().type);
    }
    for (const auto& it : sa.items) {
      FactTemplate f{it.fact.name, typed_terms(types, it.fact, relation_color(it.fact.name, sa.loc), sa.loc, "relation")};
      (it.add ? a.adds : a.dels).push_back(std::move(f));
    }
    net.actions.push_back(std::move(a));
  }

  for (const auto& p : m.places) {
    if (!p.cls.empty() && p.cls != "control")
      throw ValidationError(at(p.loc) + "place classes other than control belong in .cpn files");
    net.places.push_back({p.name, resolve_types(types, p.types, p.loc)});
  }
  for (const auto& v : m.views) net.views.push_back({v.name, resolve_types(types, v.types, v.loc), v.query});

  auto arc_color = [&](const std::string& place, SourceLoc loc) {
    if (auto i = net.place_index(place)) return net.places[*i].color;
    if (auto i = net.view_index(place)) return net.views[*i].color;
    throw SchemaError(at(loc) + "unknown place '" + place + "'");
  };
  for (const auto& st : m.transitions) {
    if (st.priority || st.silent || st.observe)
      throw ValidationError(at(st.loc) + "transition " + st.name + ": priorities and labels belong in .cpn files");
    DbTransition t;
    t.name = st.name;
    VarTypes vars;
    for (const auto& a : st.arcs) note_vars(vars, a.atom, arc_color(a.atom.name, st.loc));
    const Action* act = nullptr;
    if (st.action) {
      act = net.action(st.action->name);
      if (!act) throw SchemaError(at(st.loc) + "unknown action '" + st.action->name + "'");
      std::vector<TypeId> ptypes;
      for (const auto& p : act->params) ptypes.push_back(p.type);
      note_vars(vars, *st.action, ptypes);
      t.action = ActionBinding{act->name, typed_terms(types, *st.action, ptypes, st.loc, "action")};
      for (const auto& a : st.action->args)
        if (a.is_var && a.nu) t.fresh.insert(a.name);
    }
    for (const auto& a : st.arcs) {
      NetArc arc{a.atom.name, typed_terms(types, a.atom, arc_color(a.atom.name, st.loc), st.loc, "place")};
      for (const auto& x : a.atom.args)
        if (x.is_var && x.nu) {
          if (a.kind == SArc::Kind::In || a.kind == SArc::Kind::Read)
            throw ValidationError(at(st.loc) + "transition " + st.name + ": nu on an input arc");
          t.fresh.insert(x.name);
        }
      switch (a.kind) {
        case SArc::Kind::In: t.inputs.push_back(std::move(arc)); break;
        case SArc::Kind::Read: t.reads.push_back(std::move(arc)); break;
        case SArc::Kind::Out: t.outputs.push_back(std::move(arc)); break;
        case SArc::Kind::Rollback: t.rollbacks.push_back(std::move(arc)); break;
      }
    }
    if (st.guard) t.guard = typed_guard(types, *st.guard, vars, st.loc);
    net.transitions.push_back(std::move(t));
  }

  net.policy = elaborate_policy(types, m.policy);
  net.initial = net.empty_snapshot();
  run_initial(m.initial, params, [&](SInitStmt::Kind kind, const SAtom& a, std::int64_t count, SourceLoc loc) {
    if (kind == SInitStmt::Kind::Fact) {
      auto color = relation_color(a.name, loc);
      net.initial.instance.insert(a.name, ground_tuple(types, a, color, loc, "relation"));
      return;
    }
    auto p = net.place_index(a.name);
    if (!p) throw SchemaError(at(loc) + "tokens can only go on control places, not '" + a.name + "'");
    if (count < 1) throw ValidationError(at(loc) + "token count must be positive");
    net.initial.marking.add(*p, ground_tuple(types, a, net.places[*p].color, loc, "place"),
                            static_cast<std::uint32_t>(count));
  });
  return net;
}

inline NuCpn elaborate_cpn(const ModelFile& m, const ParamOverrides& overrides = {}) {
  using namespace detail;
  check_model(m);
  auto params = resolve_params(m, overrides);
  if (!m.relations.empty() || !m.queries.empty() || !m.actions.empty() || !m.views.empty() || !m.foreign_keys.empty() ||
      !m.domains.empty())
    throw ValidationError("a ν-CPN file declares only types, places, transitions, initial tokens and a policy");
  NuCpn net;
  declare_types(net.types, m);
  for (const auto& p : m.places) {
    auto cls = p.cls.empty() ? std::optional(PlaceClass::Control) : parse_place_class(p.cls);
    if (!cls) throw ValidationError(at(p.loc) + "unknown place class '" + p.cls + "'");
    net.places.push_back({p.name, resolve_types(net.types, p.types, p.loc), *cls});
  }
  for (const auto& st : m.transitions) {
    if (st.action) throw ValidationError(at(st.loc) + "transition " + st.name + ": actions belong in DB-net files");
    CpnTransition t;
    t.name = st.name;
    VarTypes vars;
    auto color = [&](const std::string& place) {
      auto i = net.place_index(place);
      if (!i) throw SchemaError(at(st.loc) + "unknown place '" + place + "'");
      return net.places[*i].color;
    };
    for (const auto& a : st.arcs) note_vars(vars, a.atom, color(a.atom.name));
    for (const auto& a : st.arcs) {
      NetArc arc{a.atom.name, typed_terms(net.types, a.atom, color(a.atom.name), st.loc, "place")};
      for (const auto& x : a.atom.args)
        if (x.is_var && x.nu) {
          if (a.kind != SArc::Kind::Out)
            throw ValidationError(at(st.loc) + "transition " + st.name + ": nu outside an output arc");
          t.fresh.insert(x.name);
        }
      switch (a.kind) {
        case SArc::Kind::In: t.inputs.push_back(std::move(arc)); break;
        case SArc::Kind::Read: t.reads.push_back(std::move(arc)); break;
        case SArc::Kind::Out: t.outputs.push_back(std::move(arc)); break;
        case SArc::Kind::Rollback:
          throw ValidationError(at(st.loc) + "transition " + st.name + ": rollback arcs belong in DB-net files");
      }
    }
    if (st.guard) t.guard = typed_guard(net.types, *st.guard, vars, st.loc);
    if (st.priority) {
      auto p = parse_priority(*st.priority);
      if (!p) throw ValidationError(at(st.loc) + "unknown priority '" + *st.priority + "'");
      t.priority = *p;
    }
    if (st.silent && st.observe) throw ValidationError(at(st.loc) + "transition " + st.name + " is both silent and observed");
    if (st.silent) t.label = LabelSpec::silent();
    if (st.observe) t.label = LabelSpec::observable(st.observe->first, st.observe->second);
    net.transitions.push_back(std::move(t));
  }
  net.policy = elaborate_policy(net.types, m.policy);
  run_initial(m.initial, params, [&](SInitStmt::Kind kind, const SAtom& a, std::int64_t count, SourceLoc loc) {
    if (kind == SInitStmt::Kind::Fact) throw ValidationError(at(loc) + "facts belong in DB-net files");
    auto p = net.place_index(a.name);
    if (!p) throw SchemaError(at(loc) + "unknown place '" + a.name + "'");
    if (count < 1) throw ValidationError(at(loc) + "token count must be positive");
    net.initial.add(*p, ground_tuple(net.types, a, net.places[*p].color, loc, "place"), static_cast<std::uint32_t>(count));
  });
  return net;
}

namespace detail {

inline Lit lit_of(const Value& v) {
  switch (v.tag()) {
    case Value::Tag::Null: return {Lit::Kind::Null, "null"};
    case Value::Tag::Bool: return {Lit::Kind::Bool, v.as_bool() ? "true" : "false"};
    case Value::Tag::Int: return {Lit::Kind::Int, std::to_string(v.as_int())};
    case Value::Tag::Real: return {Lit::Kind::Real, v.as_decimal().str()};
    case Value::Tag::String: return {Lit::Kind::Str, v.as_string()};
  }
  return {};
}

inline STerm sterm_of(const Term& t, bool nu = false) {
  return t.is_var() ? STerm::var(t.var, nu) : STerm::constant(lit_of(t.value));
}

inline SGuard sguard_of(const Guard& g) {
  switch (g.kind) {
    case Guard::Kind::True: return {};
    case Guard::Kind::Lit:
      return {SGuard::Kind::Lit, SLiteral{g.lit.pred, sterm_of(g.lit.lhs), sterm_of(g.lit.rhs), g.lit.negated}, {}};
    case Guard::Kind::Not: return SGuard::negate(sguard_of(g.children[0]));
    case Guard::Kind::And: {
      SGuard out{SGuard::Kind::And, {}, {}};
      for (const auto& c : g.children) out.kids.push_back(sguard_of(c));
      return out;
    }
  }
  return {};
}

inline std::vector<SDomainList> domain_lists(const TypeDomain& types, const std::map<TypeId, std::vector<Value>>& m) {
  std::vector<SDomainList> out;
  for (const auto& [t, vs] : m) {
    SDomainList d{types.name(t), {}};
    for (const auto& v : vs) d.values.push_back(lit_of(v));
    out.push_back(std::move(d));
  }
  return out;
}

inline SPolicy spolicy_of(const TypeDomain& types, const FreshPolicy& fp) {
  return {fp.mode_text(), domain_lists(types, fp.samples), domain_lists(types, fp.reservoirs)};
}

}  // namespace detail

/// Printable syntax for a ν-CPN; fresh variables are marked on every output.
inline ModelFile model_from_cpn(const NuCpn& net) {
  using namespace detail;
  ModelFile m;
  for (std::size_t i = TypeDomain::builtin_count; i < net.types.size(); ++i) {
    const auto& t = net.types.at(net.types.id(i));
    m.types.push_back({t.name, kind_name(t.kind)});
  }
  for (const auto& p : net.places) {
    SPlace sp{p.name, {}, place_class_name(p.cls), {}};
    for (auto t : p.color) sp.types.push_back(net.types.name(t));
    m.places.push_back(std::move(sp));
  }
  for (const auto& t : net.transitions) {
    STransition st;
    st.name = t.name;
    auto add = [&](SArc::Kind k, const std::vector<NetArc>& arcs) {
      for (const auto& a : arcs) {
        SAtom atom{a.place, {}};
        for (const auto& x : a.terms) atom.args.push_back(sterm_of(x, k == SArc::Kind::Out && x.is_var() && t.fresh.count(x.var)));
        st.arcs.push_back({k, std::move(atom)});
      }
    };
    add(SArc::Kind::In, t.inputs);
    add(SArc::Kind::Read, t.reads);
    add(SArc::Kind::Out, t.outputs);
    if (!t.guard.is_true()) st.guard = sguard_of(t.guard);
    if (t.priority != Priority::Normal) st.priority = priority_name(t.priority);
    if (t.label.kind == LabelSpec::Kind::Silent) st.silent = true;
    if (t.label.kind == LabelSpec::Kind::Observable) st.observe = std::make_pair(t.label.source, t.label.outcome);
    m.transitions.push_back(std::move(st));
  }
  for (const auto& e : net.initial.entries()) {
    SInitStmt s;
    s.kind = SInitStmt::Kind::Token;
    s.atom.name = net.places[e.slot].name;
    for (const auto& v : e.tuple()) s.atom.args.push_back(STerm::constant(lit_of(v)));
    s.count = e.count;
    m.initial.push_back(std::move(s));
  }
  m.policy = spolicy_of(net.types, net.policy);
  return m;
}

inline std::string print_cpn(const NuCpn& net) { return print_model(model_from_cpn(net)); }

/// Parses a model; files ending in `.cpn` are ν-CPNs, everything else a DB-net.
inline bool is_cpn_path(std::string_view path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".cpn";
}

}  // namespace dbnet::dsl
