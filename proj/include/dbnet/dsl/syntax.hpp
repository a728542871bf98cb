#pragma once

// Syntax tree of the model language, kept close to the source text so that
// print(parse(x)) parses back to the same tree. Constants stay untyped until
// elaboration.

#include <optional>
#include <string>
#include <vector>

#include "dbnet/value.hpp"

namespace dbnet::dsl {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

struct Lit {
  enum class Kind { Int, Real, Str, Bool, Null };
  Kind kind = Kind::Int;
  std::string text;  // digits, decimal text, unquoted string, true/false, null
  bool operator==(const Lit&) const = default;

  std::string print() const { return kind == Kind::Str ? Value::quote(text) : text; }
};

struct STerm {
  bool is_var = true;
  std::string name;
  Lit lit;
  bool nu = false;
  bool operator==(const STerm&) const = default;

  static STerm var(std::string n, bool nu = false) { return {true, std::move(n), {}, nu}; }
  static STerm constant(Lit l) { return {false, {}, std::move(l), false}; }
  std::string print() const { return is_var ? (nu ? "nu " : "") + name : lit.print(); }
};

struct SAtom {
  std::string name;
  std::vector<STerm> args;
  bool operator==(const SAtom&) const = default;

  std::string print() const {
    std::string s = name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + args[i].print();
    return s + ")";
  }
};

struct SLiteral {
  Predicate pred = Predicate::Eq;
  STerm lhs, rhs;
  bool negated = false;
  bool operator==(const SLiteral&) const = default;

  std::string print() const {
    if (pred == Predicate::Eq) return lhs.print() + (negated ? " != " : " = ") + rhs.print();
    std::string body = pred == Predicate::Succ ? "succ(" + lhs.print() + ", " + rhs.print() + ")"
                                               : lhs.print() + " " + predicate_name(pred) + " " + rhs.print();
    return negated ? "not " + body : body;
  }
};

struct SGuard {
  enum class Kind { True, Lit, Not, And };
  Kind kind = Kind::True;
  SLiteral lit;
  std::vector<SGuard> kids;
  bool operator==(const SGuard&) const = default;

  /// ¬g with double negations and negated literals folded.
  static SGuard negate(SGuard g) {
    if (g.kind == Kind::Lit) {
      g.lit.negated = !g.lit.negated;
      return g;
    }
    if (g.kind == Kind::Not) return std::move(g.kids.front());
    return SGuard{Kind::Not, {}, {std::move(g)}};
  }
  static SGuard all(std::vector<SGuard> gs) {
    if (gs.empty()) return {};
    if (gs.size() == 1) return std::move(gs.front());
    return SGuard{Kind::And, {}, std::move(gs)};
  }
  static SGuard any(std::vector<SGuard> gs) {
    if (gs.size() == 1) return std::move(gs.front());
    std::vector<SGuard> neg;
    for (auto& g : gs) neg.push_back(negate(std::move(g)));
    return negate(all(std::move(neg)));
  }

  std::string print() const {
    switch (kind) {
      case Kind::True: return "true";
      case Kind::Lit: return lit.print();
      case Kind::Not: return "not (" + kids[0].print() + ")";
      case Kind::And: {
        std::string s;
        for (std::size_t i = 0; i < kids.size(); ++i) {
          bool paren = kids[i].kind == Kind::And;
          s += (i ? " & " : "") + std::string(paren ? "(" : "") + kids[i].print() + (paren ? ")" : "");
        }
        return s;
      }
    }
    return "";
  }
};

struct SParam {
  std::string name;
  std::int64_t value = 0;
  bool operator==(const SParam&) const = default;
};

struct SType {
  std::string name;
  std::string kind;
  bool operator==(const SType&) const = default;
};

struct SAttr {
  std::string name;
  std::string type;
  bool key = false;
  bool operator==(const SAttr&) const = default;
};

struct SRelation {
  std::string name;
  std::vector<SAttr> attrs;
  SourceLoc loc;
  bool operator==(const SRelation& o) const { return name == o.name && attrs == o.attrs; }
};

struct SForeignKey {
  std::string source;
  std::vector<std::string> source_cols;
  std::string target;
  std::vector<std::string> target_cols;
  SourceLoc loc;
  bool operator==(const SForeignKey& o) const {
    return source == o.source && source_cols == o.source_cols && target == o.target && target_cols == o.target_cols;
  }
};

struct SDomain {
  std::string relation;
  std::string column;
  std::vector<Lit> values;
  SourceLoc loc;
  bool operator==(const SDomain& o) const { return relation == o.relation && column == o.column && values == o.values; }
};

struct STypedName {
  std::string name;
  std::string type;
  bool operator==(const STypedName&) const = default;
};

/// An atom or a comparison inside a query disjunct.
struct SQueryItem {
  bool is_atom = true;
  SAtom atom;
  SLiteral lit;
  bool operator==(const SQueryItem&) const = default;
};

struct SQuery {
  std::string name;
  std::vector<STypedName> params;
  std::vector<std::vector<SQueryItem>> disjuncts;
  SourceLoc loc;
  bool operator==(const SQuery& o) const { return name == o.name && params == o.params && disjuncts == o.disjuncts; }
};

struct SActionItem {
  bool add = true;
  SAtom fact;
  bool operator==(const SActionItem&) const = default;
};

struct SAction {
  std::string name;
  std::vector<STypedName> params;
  std::vector<SActionItem> items;
  SourceLoc loc;
  bool operator==(const SAction& o) const { return name == o.name && params == o.params && items == o.items; }
};

struct SPlace {
  std::string name;
  std::vector<std::string> types;
  std::string cls;  // empty, or control/relation/lock/aux in ν-CPN files
  SourceLoc loc;
  bool operator==(const SPlace& o) const { return name == o.name && types == o.types && cls == o.cls; }
};

struct SView {
  std::string name;
  std::vector<std::string> types;
  std::string query;
  SourceLoc loc;
  bool operator==(const SView& o) const { return name == o.name && types == o.types && query == o.query; }
};

struct SArc {
  enum class Kind { In, Read, Out, Rollback };
  Kind kind = Kind::In;
  SAtom atom;
  bool operator==(const SArc&) const = default;
};

struct STransition {
  std::string name;
  std::vector<SArc> arcs;
  std::optional<SGuard> guard;
  std::optional<SAtom> action;
  std::optional<std::string> priority;
  bool silent = false;
  std::optional<std::pair<std::string, std::string>> observe;  // source transition, outcome
  SourceLoc loc;
  bool operator==(const STransition& o) const {
    return name == o.name && arcs == o.arcs && guard == o.guard && action == o.action && priority == o.priority &&
           silent == o.silent && observe == o.observe;
  }
};

/// Bound of a `for` loop: a number or a parameter name.
struct SBound {
  bool is_param = false;
  std::int64_t value = 0;
  std::string param;
  bool operator==(const SBound&) const = default;
  std::string print() const { return is_param ? param : std::to_string(value); }
};

struct SInitStmt {
  enum class Kind { Fact, Token, For };
  Kind kind = Kind::Fact;
  SAtom atom;
  std::int64_t count = 1;
  std::string var;
  SBound lo, hi;
  std::vector<SInitStmt> body;
  SourceLoc loc;
  bool operator==(const SInitStmt& o) const {
    return kind == o.kind && atom == o.atom && count == o.count && var == o.var && lo == o.lo && hi == o.hi &&
           body == o.body;
  }
};

struct SDomainList {
  std::string type;
  std::vector<Lit> values;
  bool operator==(const SDomainList&) const = default;
};

struct SPolicy {
  std::optional<std::string> fresh;  // "recycling", "unbounded", "bounded:k"
  std::vector<SDomainList> samples;
  std::vector<SDomainList> reservoirs;
  bool operator==(const SPolicy&) const = default;
};

struct ModelFile {
  std::vector<SParam> params;
  std::vector<SType> types;
  std::vector<SRelation> relations;
  std::vector<SForeignKey> foreign_keys;
  std::vector<SDomain> domains;
  std::vector<SQuery> queries;
  std::vector<SAction> actions;
  std::vector<SPlace> places;
  std::vector<SView> views;
  std::vector<STransition> transitions;
  std::vector<SInitStmt> initial;
  SPolicy policy;
  bool operator==(const ModelFile&) const = default;
};

namespace detail {

inline std::string join_names(const std::vector<std::string>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
  return s;
}

inline std::string join_typed(const std::vector<STypedName>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i].name + ": " + xs[i].type;
  return s;
}

inline std::string join_lits(const std::vector<Lit>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i].print();
  return s;
}

inline void print_init(std::string& out, const SInitStmt& s, int depth) {
  std::string pad(2 * depth, ' ');
  switch (s.kind) {
    case SInitStmt::Kind::Fact: out += pad + "fact " + s.atom.print() + ";\n"; break;
    case SInitStmt::Kind::Token:
      out += pad + "token " + s.atom.print() + (s.count != 1 ? " * " + std::to_string(s.count) : "") + ";\n";
      break;
    case SInitStmt::Kind::For:
      out += pad + "for " + s.var + " in " + s.lo.print() + ".." + s.hi.print() + " {\n";
      for (const auto& b : s.body) print_init(out, b, depth + 1);
      out += pad + "}\n";
      break;
  }
}

}  // namespace detail

inline std::string print_model(const ModelFile& m) {
  using detail::join_lits;
  using detail::join_names;
  using detail::join_typed;
  std::string out;
  auto section = [&] {
    if (!out.empty() && out.substr(out.size() - 2) != "\n\n") out += "\n";
  };
  for (const auto& p : m.params) out += "param " + p.name + " = " + std::to_string(p.value) + ";\n";
  section();
  for (const auto& t : m.types) out += "type " + t.name + " : " + t.kind + ";\n";
  section();
  for (const auto& r : m.relations) {
    out += "relation " + r.name + "(";
    for (std::size_t i = 0; i < r.attrs.size(); ++i)
      out += (i ? ", " : "") + r.attrs[i].name + ": " + r.attrs[i].type + (r.attrs[i].key ? " key" : "");
    out += ");\n";
  }
  for (const auto& f : m.foreign_keys)
    out += "foreign key " + f.source + "(" + join_names(f.source_cols) + ") references " + f.target + "(" +
           join_names(f.target_cols) + ");\n";
  for (const auto& d : m.domains) out += "domain " + d.relation + "(" + d.column + ") in {" + join_lits(d.values) + "};\n";
  section();
  for (const auto& q : m.queries) {
    out += "query " + q.name + "(" + join_typed(q.params) + ") :=";
    for (std::size_t d = 0; d < q.disjuncts.size(); ++d) {
      out += d ? "\n    | " : " ";
      const auto& items = q.disjuncts[d];
      for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? " & " : "") + (items[i].is_atom ? items[i].atom.print() : items[i].lit.print());
    }
    out += ";\n";
  }
  section();
  for (const auto& a : m.actions) {
    out += "action " + a.name + "(" + join_typed(a.params) + ") {";
    for (const auto& it : a.items) out += std::string(" ") + (it.add ? "add " : "del ") + it.fact.print() + ";";
    out += " }\n";
  }
  section();
  for (const auto& p : m.places)
    out += "place " + p.name + " : (" + join_names(p.types) + ")" + (p.cls.empty() ? "" : " " + p.cls) + ";\n";
  for (const auto& v : m.views) out += "view " + v.name + " : (" + join_names(v.types) + ") := " + v.query + ";\n";
  section();
  for (const auto& t : m.transitions) {
    out += "transition " + t.name + " {\n";
    for (const auto& a : t.arcs) {
      const char* kw = a.kind == SArc::Kind::In     ? "in"
                       : a.kind == SArc::Kind::Read ? "read"
                       : a.kind == SArc::Kind::Out  ? "out"
                                                    : "rollback";
      out += std::string("  ") + kw + " " + a.atom.print() + ";\n";
    }
    if (t.guard) out += "  guard " + t.guard->print() + ";\n";
    if (t.action) out += "  action " + t.action->print() + ";\n";
    if (t.priority) out += "  priority " + *t.priority + ";\n";
    if (t.silent) out += "  silent;\n";
    if (t.observe) out += "  observe " + t.observe->first + " " + t.observe->second + ";\n";
    out += "}\n";
  }
  section();
  if (!m.initial.empty()) {
    out += "initial {\n";
    for (const auto& s : m.initial) detail::print_init(out, s, 1);
    out += "}\n";
  }
  const auto& p = m.policy;
  if (p.fresh || !p.samples.empty() || !p.reservoirs.empty()) {
    section();
    out += "policy {\n";
    if (p.fresh) {
      auto f = *p.fresh;
      if (f.rfind("bounded:", 0) == 0) f = "bounded " + f.substr(8);
      out += "  fresh " + f + ";\n";
    }
    for (const auto& s : p.samples) out += "  sample " + s.type + " = {" + join_lits(s.values) + "};\n";
    for (const auto& s : p.reservoirs) out += "  reservoir " + s.type + " = {" + join_lits(s.values) + "};\n";
    out += "}\n";
  }
  while (out.size() > 1 && out.substr(out.size() - 2) == "\n\n") out.pop_back();
  return out;
}

}  // namespace dbnet::dsl
