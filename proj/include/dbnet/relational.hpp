#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dbnet/bag.hpp"
#include "dbnet/value.hpp"

namespace dbnet {

struct Attribute {
  std::string name;
  TypeId type;
  bool key = false;
  bool operator==(const Attribute&) const = default;
};

struct RelationSchema {
  std::string name;
  std::vector<Attribute> attributes;

  std::size_t arity() const { return attributes.size(); }
  std::vector<TypeId> types() const {
    std::vector<TypeId> out;
    for (const auto& a : attributes) out.push_back(a.type);
    return out;
  }
  std::optional<std::size_t> column(std::string_view attr) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
      if (attributes[i].name == attr) return i;
    return std::nullopt;
  }
  bool operator==(const RelationSchema&) const = default;
};

// Column indices are 0-based throughout.
struct PrimaryKey {
  std::string relation;
  std::vector<std::size_t> columns;
  bool operator==(const PrimaryKey&) const = default;
};

struct ForeignKey {
  std::string source;
  std::vector<std::size_t> source_columns;
  std::string target;
  std::vector<std::size_t> target_columns;
  bool operator==(const ForeignKey&) const = default;
};

struct DomainConstraint {
  std::string relation;
  std::size_t column = 0;
  std::vector<Value> allowed;
  bool operator==(const DomainConstraint&) const = default;
};

using Constraint = std::variant<PrimaryKey, ForeignKey, DomainConstraint>;

class Schema {
 public:
  TypeDomain types;
  std::vector<RelationSchema> relations;
  std::vector<Constraint> constraints;

  /// Adds the relation and, when some attribute is flagged as key, the
  /// corresponding primary key.
  std::uint32_t add_relation(RelationSchema r) {
    if (find(r.name)) throw ValidationError("duplicate relation '" + r.name + "'");
    if (r.attributes.empty()) throw ValidationError("relation '" + r.name + "' has arity 0");
    PrimaryKey pk{r.name, {}};
    for (std::size_t i = 0; i < r.attributes.size(); ++i)
      if (r.attributes[i].key) pk.columns.push_back(i);
    relations.push_back(std::move(r));
    if (!pk.columns.empty()) constraints.emplace_back(std::move(pk));
    return static_cast<std::uint32_t>(relations.size() - 1);
  }

  void add_constraint(Constraint c) {
    if (auto problem = constraint_problem(c)) throw ValidationError(*problem);
    constraints.push_back(std::move(c));
  }

  std::optional<std::uint32_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < relations.size(); ++i)
      if (relations[i].name == name) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }
  std::uint32_t require(std::string_view name) const {
    if (auto r = find(name)) return *r;
    throw SchemaError("unknown relation '" + std::string(name) + "'");
  }
  const RelationSchema& relation(std::uint32_t i) const { return relations.at(i); }
  const RelationSchema& relation(std::string_view name) const { return relations[require(name)]; }

  bool is_key(const std::string& rel, std::vector<std::size_t> cols) const {
    std::sort(cols.begin(), cols.end());
    for (const auto& c : constraints)
      if (auto* pk = std::get_if<PrimaryKey>(&c); pk && pk->relation == rel) {
        auto k = pk->columns;
        std::sort(k.begin(), k.end());
        if (k == cols) return true;
      }
    return false;
  }

  std::optional<std::string> constraint_problem(const Constraint& c) const {
    auto in_range = [&](const std::string& rel, const std::vector<std::size_t>& cols) -> std::optional<std::string> {
      auto r = find(rel);
      if (!r) return "constraint on unknown relation '" + rel + "'";
      if (cols.empty()) return "empty column set on '" + rel + "'";
      for (auto i : cols)
        if (i >= relations[*r].arity()) return "column " + std::to_string(i + 1) + " out of range for '" + rel + "'";
      std::set<std::size_t> uniq(cols.begin(), cols.end());
      if (uniq.size() != cols.size()) return "repeated column in constraint on '" + rel + "'";
      return std::nullopt;
    };
    if (auto* pk = std::get_if<PrimaryKey>(&c)) return in_range(pk->relation, pk->columns);
    if (auto* fk = std::get_if<ForeignKey>(&c)) {
      if (auto p = in_range(fk->source, fk->source_columns)) return p;
      if (auto p = in_range(fk->target, fk->target_columns)) return p;
      if (fk->source_columns.size() != fk->target_columns.size())
        return "foreign key " + fk->source + " -> " + fk->target + " has mismatched column counts";
      const auto& s = relation(fk->source);
      const auto& t = relation(fk->target);
      for (std::size_t i = 0; i < fk->source_columns.size(); ++i)
        if (s.attributes[fk->source_columns[i]].type != t.attributes[fk->target_columns[i]].type)
          return "foreign key " + fk->source + " -> " + fk->target + " joins columns of different types";
      if (!is_key(fk->target, fk->target_columns))
        return "foreign key target columns of '" + fk->target + "' are not its key";
      return std::nullopt;
    }
    const auto& d = std::get<DomainConstraint>(c);
    if (auto p = in_range(d.relation, {d.column})) return p;
    auto ty = relation(d.relation).attributes[d.column].type;
    for (const auto& v : d.allowed)
      if (v.type() != ty) return "domain constraint on '" + d.relation + "' lists a value of the wrong type";
    return std::nullopt;
  }

  std::vector<std::string> validate() const {
    std::vector<std::string> out;
    for (const auto& c : constraints)
      if (auto p = constraint_problem(c)) out.push_back(*p);
    return out;
  }

  std::string describe(const Constraint& c) const {
    auto cols = [&](const std::string& rel, const std::vector<std::size_t>& cs) {
      std::string s = rel + "(";
      const auto* r = find(rel) ? &relation(rel) : nullptr;
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (i) s += ",";
        s += r && cs[i] < r->arity() ? r->attributes[cs[i]].name : std::to_string(cs[i] + 1);
      }
      return s + ")";
    };
    if (auto* pk = std::get_if<PrimaryKey>(&c)) return "key " + cols(pk->relation, pk->columns);
    if (auto* fk = std::get_if<ForeignKey>(&c))
      return "foreign key " + cols(fk->source, fk->source_columns) + " references " + cols(fk->target, fk->target_columns);
    const auto& d = std::get<DomainConstraint>(c);
    std::string s = "domain " + cols(d.relation, {d.column}) + " in {";
    for (std::size_t i = 0; i < d.allowed.size(); ++i) s += (i ? "," : "") + d.allowed[i].text();
    return s + "}";
  }

  bool operator==(const Schema&) const = default;
};

inline void check_tuple_type(const Schema& schema, const RelationSchema& r, const Tuple& t) {
  if (t.size() != r.arity())
    throw TypeError("fact for '" + r.name + "' has arity " + std::to_string(t.size()) + ", expected " +
                    std::to_string(r.arity()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& a = r.attributes[i];
    if (t[i].type() != a.type || !t[i].fits(schema.types.kind(a.type)))
      throw TypeError("value " + t[i].text() + " does not fit column " + a.name + " of '" + r.name + "'");
  }
}

/// Finite set of facts over a schema.
class Instance {
 public:
  Instance() : schema_(std::make_shared<Schema>()) {}
  explicit Instance(std::shared_ptr<const Schema> s) : schema_(std::move(s)) {}

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

  bool insert(std::uint32_t rel, const Tuple& t) {
    check_tuple_type(*schema_, schema_->relation(rel), t);
    if (facts_.count(rel, t)) return false;
    facts_.add(rel, t);
    return true;
  }
  bool insert(std::string_view rel, const Tuple& t) { return insert(schema_->require(rel), t); }
  bool erase(std::uint32_t rel, const Tuple& t) { return facts_.remove(rel, t); }
  bool erase(std::string_view rel, const Tuple& t) { return erase(schema_->require(rel), t); }
  bool contains(std::uint32_t rel, const Tuple& t) const { return facts_.count(rel, t) > 0; }
  bool contains(std::string_view rel, const Tuple& t) const { return contains(schema_->require(rel), t); }

  std::span<const Bag::Entry> facts(std::uint32_t rel) const { return facts_.range(rel); }
  std::vector<Tuple> tuples(std::string_view rel) const {
    std::vector<Tuple> out;
    for (const auto& e : facts(schema_->require(rel))) out.push_back(e.tuple());
    return out;
  }
  std::size_t size() const { return facts_.entries().size(); }
  const Bag& bag() const { return facts_; }

  /// One `Relation(v1,...,vn)` line per fact, sorted lexicographically.
  std::vector<std::string> lines() const {
    std::vector<std::string> out;
    for (const auto& e : facts_.entries()) out.push_back(fact_text(schema_->relation(e.slot).name, e.tuple()));
    std::sort(out.begin(), out.end());
    return out;
  }
  std::string text() const {
    std::string s;
    for (const auto& l : lines()) s += l + "\n";
    return s;
  }

  friend bool operator==(const Instance& a, const Instance& b) { return a.facts_ == b.facts_; }
  std::size_t hash() const { return facts_.hash(); }

 private:
  std::shared_ptr<const Schema> schema_;
  Bag facts_;
};

/// Values of the given type occurring anywhere in the instance.
inline std::set<Value> active_domain(const Instance& inst, TypeId type) {
  std::set<Value> out;
  for (const auto& e : inst.bag().entries())
    for (const auto& v : e.tuple())
      if (v.type() == type) out.insert(v);
  return out;
}

inline Tuple project(const Tuple& t, const std::vector<std::size_t>& cols) {
  Tuple out;
  out.reserve(cols.size());
  for (auto c : cols) out.push_back(t[c]);
  return out;
}

inline bool check_constraint(const Instance& inst, const Constraint& c) {
  const auto& schema = inst.schema();
  if (auto p = schema.constraint_problem(c)) throw ValidationError(*p);
  if (auto* pk = std::get_if<PrimaryKey>(&c)) {
    std::set<Tuple> seen;
    // Facts are a set, so a repeated key means two distinct facts share it.
    for (const auto& e : inst.facts(schema.require(pk->relation)))
      if (!seen.insert(project(e.tuple(), pk->columns)).second) return false;
    return true;
  }
  if (auto* fk = std::get_if<ForeignKey>(&c)) {
    std::set<Tuple> keys;
    for (const auto& e : inst.facts(schema.require(fk->target))) keys.insert(project(e.tuple(), fk->target_columns));
    for (const auto& e : inst.facts(schema.require(fk->source)))
      if (!keys.count(project(e.tuple(), fk->source_columns))) return false;
    return true;
  }
  const auto& d = std::get<DomainConstraint>(c);
  for (const auto& e : inst.facts(schema.require(d.relation)))
    if (std::find(d.allowed.begin(), d.allowed.end(), e.tuple()[d.column]) == d.allowed.end()) return false;
  return true;
}

/// Indices of the schema constraints the instance violates.
inline std::vector<std::size_t> violated_constraints(const Instance& inst) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < inst.schema().constraints.size(); ++i)
    if (!check_constraint(inst, inst.schema().constraints[i])) out.push_back(i);
  return out;
}

inline bool satisfies_all(const Instance& inst) { return violated_constraints(inst).empty(); }

struct TypedVar {
  std::string name;
  TypeId type;
  bool operator==(const TypedVar&) const = default;
};

/// A variable or a constant inside an inscription, atom or template.
struct Term {
  enum class Kind { Var, Const };
  Kind kind = Kind::Var;
  std::string var;
  Value value;

  static Term variable(std::string name) { return Term{Kind::Var, std::move(name), {}}; }
  static Term constant(Value v) { return Term{Kind::Const, {}, v}; }
  bool is_var() const { return kind == Kind::Var; }
  std::string text() const { return is_var() ? var : value.text(); }
  bool operator==(const Term&) const = default;
};

inline std::string terms_text(const std::vector<Term>& ts) {
  std::string s = "(";
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? "," : "") + ts[i].text();
  return s + ")";
}

using Substitution = std::map<std::string, Value>;

inline std::string substitution_text(const Substitution& theta) {
  std::string s;
  for (const auto& [k, v] : theta) s += (s.empty() ? "" : ",") + k + "=" + v.text();
  return s;
}

inline Value resolve_term(const Term& t, const Substitution& theta) {
  if (!t.is_var()) return t.value;
  auto it = theta.find(t.var);
  if (it == theta.end()) throw BindingError("variable '" + t.var + "' is unbound");
  return it->second;
}

inline Tuple resolve_terms(const std::vector<Term>& ts, const Substitution& theta) {
  Tuple out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(resolve_term(t, theta));
  return out;
}

struct FactTemplate {
  std::string relation;
  std::vector<Term> args;
  bool operator==(const FactTemplate&) const = default;
};

struct Action {
  std::string name;
  std::vector<TypedVar> params;
  std::vector<FactTemplate> adds;
  std::vector<FactTemplate> dels;

  const TypedVar* param(std::string_view n) const {
    for (const auto& p : params)
      if (p.name == n) return &p;
    return nullptr;
  }
  bool operator==(const Action&) const = default;
};

inline std::vector<std::string> validate_action(const Schema& schema, const Action& a) {
  std::vector<std::string> out;
  std::set<std::string> names;
  for (const auto& p : a.params)
    if (!names.insert(p.name).second) out.push_back("action " + a.name + ": duplicate parameter '" + p.name + "'");
  auto check = [&](const FactTemplate& f, const char* what) {
    auto r = schema.find(f.relation);
    if (!r) {
      out.push_back("action " + a.name + ": " + what + " of unknown relation '" + f.relation + "'");
      return;
    }
    const auto& rel = schema.relation(*r);
    if (f.args.size() != rel.arity()) {
      out.push_back("action " + a.name + ": " + what + " " + f.relation + " has wrong arity");
      return;
    }
    for (std::size_t i = 0; i < f.args.size(); ++i) {
      const auto& t = f.args[i];
      auto want = rel.attributes[i].type;
      if (t.is_var()) {
        const auto* p = a.param(t.var);
        if (!p) out.push_back("action " + a.name + ": variable '" + t.var + "' is not a parameter");
        else if (p->type != want)
          out.push_back("action " + a.name + ": parameter '" + t.var + "' has the wrong type for " + f.relation);
      } else if (t.value.type() != want) {
        out.push_back("action " + a.name + ": constant " + t.value.text() + " has the wrong type for " + f.relation);
      }
    }
  };
  for (const auto& f : a.adds) check(f, "addition");
  for (const auto& f : a.dels) check(f, "deletion");
  return out;
}

enum class Outcome { Committed, RolledBack };

struct ActionResult {
  Instance instance;
  Outcome outcome;
};

inline void check_action_binding(const Schema& schema, const Action& action, const Substitution& theta) {
  for (const auto& p : action.params) {
    auto it = theta.find(p.name);
    if (it == theta.end()) throw BindingError("action " + action.name + ": parameter '" + p.name + "' is unbound");
    if (it->second.type() != p.type || !it->second.fits(schema.types.kind(p.type)))
      throw TypeError("action " + action.name + ": parameter '" + p.name + "' bound to ill-typed value " +
                      it->second.text());
  }
}

/// (I \ F-θ) ∪ F+θ, kept only when every constraint of the schema holds.
inline ActionResult apply_action(const Instance& inst, const Action& action, const Substitution& theta) {
  check_action_binding(inst.schema(), action, theta);
  Instance next = inst;
  for (const auto& f : action.dels) next.erase(f.relation, resolve_terms(f.args, theta));
  for (const auto& f : action.adds) next.insert(f.relation, resolve_terms(f.args, theta));
  if (!satisfies_all(next)) return {inst, Outcome::RolledBack};
  return {std::move(next), Outcome::Committed};
}

}  // namespace dbnet
