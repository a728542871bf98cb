#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "dbnet/error.hpp"
#include "dbnet/dsl/syntax.hpp"

namespace dbnet::dsl {

struct ParseError : Error {
  ParseError(const std::string& msg, SourceLoc loc)
      : Error(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + msg), loc(loc) {}
  SourceLoc loc;
};

struct Token {
  enum class Kind { Ident, Int, Real, Str, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  SourceLoc loc;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourceLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && is_ident(src[j])) ++j;
      out.push_back({Token::Kind::Ident, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    bool neg_number = c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1]));
    if (std::isdigit(static_cast<unsigned char>(c)) || neg_number) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      bool real = false;
      // "1..3" is a range, not a decimal.
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        real = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({real ? Token::Kind::Real : Token::Kind::Int, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string s;
      std::size_t j = i + 1;
      for (;; ++j) {
        if (j >= src.size() || src[j] == '\n') throw ParseError("unterminated string", loc);
        if (src[j] == '"') break;
        if (src[j] == '\\' && j + 1 < src.size()) {
          ++j;
          s += src[j] == 'n' ? '\n' : src[j];
        } else {
          s += src[j];
        }
      }
      out.push_back({Token::Kind::Str, s, loc});
      advance(j + 1 - i);
      continue;
    }
    static const char* const puncts[] = {":=", "!=", "<=", ">=", "..", "(", ")", "{", "}", ",", ";",
                                         ":",  "=",  "<",  ">",  "&",  "|", "*", "-"};
    bool matched = false;
    for (const char* p : puncts) {
      std::string_view ps(p);
      if (src.substr(i, ps.size()) == ps) {
        out.push_back({Token::Kind::Punct, std::string(ps), loc});
        advance(ps.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(std::string("unexpected character '") + c + "'", loc);
  }
  out.push_back({Token::Kind::End, "", {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  ModelFile parse() {
    ModelFile m;
    while (!at_end()) {
      auto loc = peek().loc;
      auto kw = expect_ident("a declaration");
      if (kw == "param") {
        SParam p{expect_ident("parameter name"), 0};
        expect("=");
        p.value = integer();
        expect(";");
        m.params.push_back(p);
      } else if (kw == "type") {
        SType t{expect_ident("type name"), {}};
        expect(":");
        t.kind = expect_ident("data kind");
        expect(";");
        m.types.push_back(t);
      } else if (kw == "relation") {
        m.relations.push_back(relation(loc));
      } else if (kw == "foreign") {
        expect_keyword("key");
        SForeignKey f;
        f.loc = loc;
        f.source = expect_ident("relation name");
        f.source_cols = name_list();
        expect_keyword("references");
        f.target = expect_ident("relation name");
        f.target_cols = name_list();
        expect(";");
        m.foreign_keys.push_back(f);
      } else if (kw == "domain") {
        SDomain d;
        d.loc = loc;
        d.relation = expect_ident("relation name");
        expect("(");
        d.column = expect_ident("attribute name");
        expect(")");
        expect_keyword("in");
        d.values = lit_set();
        expect(";");
        m.domains.push_back(d);
      } else if (kw == "query") {
        m.queries.push_back(query(loc));
      } else if (kw == "action") {
        m.actions.push_back(action(loc));
      } else if (kw == "place") {
        SPlace p;
        p.loc = loc;
        p.name = expect_ident("place name");
        expect(":");
        p.types = name_list();
        if (peek().kind == Token::Kind::Ident) p.cls = next().text;
        expect(";");
        m.places.push_back(p);
      } else if (kw == "view") {
        SView v;
        v.loc = loc;
        v.name = expect_ident("view name");
        expect(":");
        v.types = name_list();
        expect(":=");
        v.query = expect_ident("query name");
        expect(";");
        m.views.push_back(v);
      } else if (kw == "transition") {
        m.transitions.push_back(transition(loc));
      } else if (kw == "initial") {
        expect("{");
        while (!accept("}")) m.initial.push_back(init_stmt());
      } else if (kw == "policy") {
        policy(m.policy);
      } else {
        throw ParseError("unknown declaration '" + kw + "'", loc);
      }
    }
    return m;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }

  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Punct && peek(k).text == p;
  }
  bool is_keyword(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Ident && peek(k).text == w;
  }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& wanted) const {
    const auto& t = peek();
    std::string got = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    throw ParseError("expected " + wanted + ", found " + got, t.loc);
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail("'" + std::string(p) + "'");
  }
  std::string expect_ident(const std::string& what) {
    if (peek().kind != Token::Kind::Ident) fail(what);
    return next().text;
  }
  void expect_keyword(std::string_view w) {
    if (!is_keyword(w)) fail("'" + std::string(w) + "'");
    ++pos_;
  }
  std::int64_t integer() {
    if (peek().kind != Token::Kind::Int) fail("an integer");
    return std::stoll(next().text);
  }

  std::vector<std::string> name_list() {
    std::vector<std::string> out;
    expect("(");
    if (accept(")")) return out;
    do out.push_back(expect_ident("a name"));
    while (accept(","));
    expect(")");
    return out;
  }

  std::vector<STypedName> typed_list() {
    std::vector<STypedName> out;
    expect("(");
    if (accept(")")) return out;
    do {
      STypedName t;
      t.name = expect_ident("a name");
      expect(":");
      t.type = expect_ident("a type");
      out.push_back(t);
    } while (accept(","));
    expect(")");
    return out;
  }

  bool at_literal() const {
    auto k = peek().kind;
    return k == Token::Kind::Int || k == Token::Kind::Real || k == Token::Kind::Str ||
           is_keyword("true") || is_keyword("false") || is_keyword("null");
  }

  Lit literal() {
    const auto& t = next();
    switch (t.kind) {
      case Token::Kind::Int: return {Lit::Kind::Int, t.text};
      case Token::Kind::Real: return {Lit::Kind::Real, t.text};
      case Token::Kind::Str: return {Lit::Kind::Str, t.text};
      case Token::Kind::Ident:
        if (t.text == "true" || t.text == "false") return {Lit::Kind::Bool, t.text};
        if (t.text == "null") return {Lit::Kind::Null, t.text};
        break;
      default: break;
    }
    --pos_;
    fail("a constant");
  }

  std::vector<Lit> lit_set() {
    std::vector<Lit> out;
    expect("{");
    if (accept("}")) return out;
    do out.push_back(literal());
    while (accept(","));
    expect("}");
    return out;
  }

  STerm term() {
    if (at_literal()) return STerm::constant(literal());
    bool nu = false;
    if (is_keyword("nu") && peek(1).kind == Token::Kind::Ident) {
      ++pos_;
      nu = true;
    }
    return STerm::var(expect_ident("a variable or constant"), nu);
  }

  SAtom atom() {
    SAtom a;
    a.name = expect_ident("a name");
    expect("(");
    if (!accept(")")) {
      do a.args.push_back(term());
      while (accept(","));
      expect(")");
    }
    return a;
  }

  SRelation relation(SourceLoc loc) {
    SRelation r;
    r.loc = loc;
    r.name = expect_ident("relation name");
    expect("(");
    if (!accept(")")) {
      do {
        SAttr a;
        a.name = expect_ident("attribute name");
        expect(":");
        a.type = expect_ident("attribute type");
        if (is_keyword("key")) {
          ++pos_;
          a.key = true;
        }
        r.attrs.push_back(a);
      } while (accept(","));
      expect(")");
    }
    expect(";");
    return r;
  }

  // term op term | succ(term, term); `>` and `>=` are stored flipped.
  SLiteral comparison() {
    if (is_keyword("succ") && is_punct("(", 1)) {
      pos_ += 2;
      SLiteral l;
      l.pred = Predicate::Succ;
      l.lhs = term();
      expect(",");
      l.rhs = term();
      expect(")");
      return l;
    }
    auto lhs = term();
    auto loc = peek().loc;
    std::string op = peek().kind == Token::Kind::Punct ? next().text : "";
    auto rhs = term();
    if (op == "=") return {Predicate::Eq, lhs, rhs, false};
    if (op == "!=") return {Predicate::Eq, lhs, rhs, true};
    if (op == "<") return {Predicate::Lt, lhs, rhs, false};
    if (op == "<=") return {Predicate::Le, lhs, rhs, false};
    if (op == ">") return {Predicate::Lt, rhs, lhs, false};
    if (op == ">=") return {Predicate::Le, rhs, lhs, false};
    throw ParseError("expected a comparison operator", loc);
  }

  SGuard guard_or() {
    std::vector<SGuard> parts{guard_and()};
    while (accept("|")) parts.push_back(guard_and());
    return SGuard::any(std::move(parts));
  }
  SGuard guard_and() {
    std::vector<SGuard> parts{guard_unary()};
    while (accept("&")) parts.push_back(guard_unary());
    return SGuard::all(std::move(parts));
  }
  SGuard guard_unary() {
    if (is_keyword("not")) {
      ++pos_;
      return SGuard::negate(guard_unary());
    }
    if (is_keyword("true") && !is_punct("=", 1) && !is_punct("!=", 1)) {
      ++pos_;
      return {};
    }
    if (accept("(")) {
      auto g = guard_or();
      expect(")");
      return g;
    }
    return SGuard{SGuard::Kind::Lit, comparison(), {}};
  }

  SQuery query(SourceLoc loc) {
    SQuery q;
    q.loc = loc;
    q.name = expect_ident("query name");
    q.params = typed_list();
    expect(":=");
    do {
      std::vector<SQueryItem> items;
      do {
        bool negated = false;
        while (is_keyword("not")) {
          ++pos_;
          negated = !negated;
        }
        bool is_atom = peek().kind == Token::Kind::Ident && !is_keyword("succ") && is_punct("(", 1) &&
                       !is_keyword("true") && !is_keyword("false") && !is_keyword("null");
        if (is_atom) {
          if (negated) throw ParseError("negated relation atoms are not allowed in queries", peek().loc);
          items.push_back({true, atom(), {}});
        } else {
          auto l = comparison();
          if (negated) l.negated = !l.negated;
          items.push_back({false, {}, l});
        }
      } while (accept("&"));
      q.disjuncts.push_back(std::move(items));
    } while (accept("|"));
    expect(";");
    return q;
  }

  SAction action(SourceLoc loc) {
    SAction a;
    a.loc = loc;
    a.name = expect_ident("action name");
    a.params = typed_list();
    expect("{");
    while (!accept("}")) {
      auto kw = expect_ident("'add' or 'del'");
      if (kw != "add" && kw != "del") throw ParseError("expected 'add' or 'del', found '" + kw + "'", toks_[pos_ - 1].loc);
      a.items.push_back({kw == "add", atom()});
      expect(";");
    }
    return a;
  }

  STransition transition(SourceLoc loc) {
    STransition t;
    t.loc = loc;
    t.name = expect_ident("transition name");
    expect("{");
    while (!accept("}")) {
      auto kwloc = peek().loc;
      auto kw = expect_ident("a transition clause");
      if (kw == "in" || kw == "read" || kw == "out" || kw == "rollback") {
        SArc::Kind k = kw == "in" ? SArc::Kind::In : kw == "read" ? SArc::Kind::Read : kw == "out" ? SArc::Kind::Out
                                                                                                   : SArc::Kind::Rollback;
        t.arcs.push_back({k, atom()});
      } else if (kw == "guard") {
        t.guard = guard_or();
      } else if (kw == "action") {
        t.action = atom();
      } else if (kw == "priority") {
        t.priority = expect_ident("low, normal or high");
      } else if (kw == "silent") {
        t.silent = true;
      } else if (kw == "observe") {
        auto src = expect_ident("transition name");
        auto outcome = expect_ident("commit or rollback");
        t.observe = std::make_pair(src, outcome);
      } else {
        throw ParseError("unknown transition clause '" + kw + "'", kwloc);
      }
      expect(";");
    }
    return t;
  }

  SBound bound() {
    if (peek().kind == Token::Kind::Int) return {false, integer(), {}};
    return {true, 0, expect_ident("a loop bound")};
  }

  SInitStmt init_stmt() {
    SInitStmt s;
    s.loc = peek().loc;
    auto kw = expect_ident("'fact', 'token' or 'for'");
    if (kw == "fact" || kw == "token") {
      s.kind = kw == "fact" ? SInitStmt::Kind::Fact : SInitStmt::Kind::Token;
      s.atom = atom();
      if (s.kind == SInitStmt::Kind::Token && accept("*")) s.count = integer();
      expect(";");
      return s;
    }
    if (kw != "for") throw ParseError("expected 'fact', 'token' or 'for', found '" + kw + "'", s.loc);
    s.kind = SInitStmt::Kind::For;
    s.var = expect_ident("loop variable");
    expect_keyword("in");
    s.lo = bound();
    expect("..");
    s.hi = bound();
    expect("{");
    while (!accept("}")) s.body.push_back(init_stmt());
    return s;
  }

  void policy(SPolicy& p) {
    expect("{");
    while (!accept("}")) {
      auto kwloc = peek().loc;
      auto kw = expect_ident("a policy clause");
      if (kw == "fresh") {
        auto mode = expect_ident("recycling, unbounded or bounded");
        if (mode == "bounded") mode += ":" + std::to_string(integer());
        else if (mode != "recycling" && mode != "unbounded")
          throw ParseError("unknown fresh policy '" + mode + "'", kwloc);
        p.fresh = mode;
      } else if (kw == "sample" || kw == "reservoir") {
        SDomainList d;
        d.type = expect_ident("type name");
        expect("=");
        d.values = lit_set();
        (kw == "sample" ? p.samples : p.reservoirs).push_back(d);
      } else {
        throw ParseError("unknown policy clause '" + kw + "'", kwloc);
      }
      expect(";");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline ModelFile parse_model_text(std::string_view src) { return Parser(src).parse(); }

}  // namespace dbnet::dsl
