#pragma once

// Content-aware weak bisimulation between a DB-net LTS and the LTS of its
// translation.
//
// Both sides are first flattened: a state keeps only its database facts and
// its tokens on the original control places. A translated-net state is
// stable when the lock is free. Comparison happens between observation
// points: stable states, states from which no stable state is reachable, and
// targets of observable steps. Runs through the other (transient) states are
// collapsed into macro steps carrying at most one observable label; weak
// transitions are then saturated and a naive partition refinement seeded by
// flat content decides the relation.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dbnet/dbnet.hpp"
#include "dbnet/lts.hpp"
#include "dbnet/nucpn.hpp"
#include "dbnet/translate.hpp"

namespace dbnet {

inline InternTable<std::string>& flat_pool() {
  static InternTable<std::string> pool;
  return pool;
}

/// Projection of a state onto facts and original control tokens.
struct FlatState {
  std::uint32_t content = 0;  // id of the canonical body in flat_pool()
  bool stable = true;

  static FlatState of(const StateText& t, bool stable) { return {flat_pool().intern(t.body()), stable}; }
  const std::string& text() const { return flat_pool().get(content); }
  friend bool operator==(const FlatState&, const FlatState&) = default;
};

struct FlatStateHash {
  std::size_t operator()(const FlatState& s) const { return s.content * 2 + s.stable; }
};

using FlatLts = Lts<FlatState>;

/// Replaces every state by its projection; edges and labels are kept as is.
template <class State, class Projection>
FlatLts flatten_with(const Lts<State>& lts, Projection&& project) {
  FlatLts out;
  out.states.reserve(lts.states.size());
  for (const auto& s : lts.states) out.states.push_back(project(s));
  out.depth = lts.depth;
  out.initial = lts.initial;
  for (const auto& l : lts.labels) out.intern(l);
  out.edges.reserve(lts.edges.size());
  for (const auto& e : lts.edges) out.edges.push_back({e.from, out.intern(lts.labels[e.label]), e.to, e.transition});
  out.truncated = lts.truncated;
  out.truncation = lts.truncation;
  return out;
}

inline FlatLts flatten(const FlatLts& lts) {
  return flatten_with(lts, [](const FlatState& s) { return s; });
}

inline FlatLts flatten(const Lts<Snapshot>& lts, const DbNet& net) {
  return flatten_with(lts, [&](const Snapshot& s) { return FlatState::of(snapshot_text(net, s), true); });
}

inline StateText flat_text(const TranslationOutput& tr, const Marking& m) {
  StateText t;
  for (const auto& e : m.entries()) {
    const auto& p = tr.net.places[e.slot];
    if (p.cls != PlaceClass::Relation && p.cls != PlaceClass::Control) continue;
    auto& into = p.cls == PlaceClass::Relation ? t.facts : t.tokens;
    for (std::uint32_t i = 0; i < e.count; ++i) into.push_back(fact_text(p.name, e.tuple()));
  }
  std::sort(t.facts.begin(), t.facts.end());
  std::sort(t.tokens.begin(), t.tokens.end());
  return t;
}

inline bool lock_free(const TranslationOutput& tr, const Marking& m) {
  auto lock = *tr.net.place_index(tr.lock_place);
  return !m.empty(lock);
}

inline FlatLts flatten(const Lts<Marking>& lts, const TranslationOutput& tr) {
  return flatten_with(lts, [&](const Marking& m) { return FlatState::of(flat_text(tr, m), lock_free(tr, m)); });
}

struct WeakBisimResult {
  struct Step {
    std::string label;    // label leading to this pair; empty for the initial pair
    std::string state_a;  // canonical flat text
    std::string state_b;
  };

  bool bisimilar = false;
  std::string reason;       // why the check refused or failed
  std::string witness_label;
  std::vector<Step> trace;  // initial pair to witness pair
  std::vector<std::uint32_t> block_a, block_b;  // partition over observation points; UINT32_MAX elsewhere
  std::size_t blocks = 0;
  std::size_t observed_a = 0, observed_b = 0;
  bool verified = false;  // direct check of both transfer conditions

  std::string verdict() const { return bisimilar ? "bisimilar" : "not-bisimilar"; }
};

namespace detail {

struct Reduced {
  std::vector<std::uint32_t> points;  // observation points, as original state ids
  std::vector<std::uint32_t> index;   // original id → point index or UINT32_MAX
  std::vector<std::uint8_t> kind;     // 0 stable, 1 stuck, 2 observable target
  // Saturated weak transitions: per point, sorted (label, target point); label 0 = ε.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> weak;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> macro;
};

inline Reduced reduce(const FlatLts& lts, const std::vector<std::uint32_t>& label_map) {
  const auto n = static_cast<std::uint32_t>(lts.states.size());
  auto off = lts.out_offsets();
  std::vector<std::uint32_t> order(lts.edges.size());
  {
    std::vector<std::uint32_t> pos(off.begin(), off.end() - 1);
    for (std::uint32_t i = 0; i < lts.edges.size(); ++i) order[pos[lts.edges[i].from]++] = i;
  }
  auto out_edges = [&](std::uint32_t s) {
    return std::span<const std::uint32_t>(order.data() + off[s], off[s + 1] - off[s]);
  };

  // States from which a stable state is reachable.
  std::vector<std::vector<std::uint32_t>> pred(n);
  for (const auto& e : lts.edges) pred[e.to].push_back(e.from);
  std::vector<bool> reaches(n, false);
  std::vector<std::uint32_t> work;
  for (std::uint32_t s = 0; s < n; ++s)
    if (lts.states[s].stable) {
      reaches[s] = true;
      work.push_back(s);
    }
  while (!work.empty()) {
    auto s = work.back();
    work.pop_back();
    for (auto p : pred[s])
      if (!reaches[p]) {
        reaches[p] = true;
        work.push_back(p);
      }
  }

  Reduced r;
  r.index.assign(n, UINT32_MAX);
  std::vector<std::uint8_t> kind(n, 255);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (lts.states[s].stable) kind[s] = 0;
    else if (!reaches[s]) kind[s] = 1;
  }
  for (const auto& e : lts.edges)
    if (label_map[e.label] != 0 && kind[e.to] == 255) kind[e.to] = 2;
  if (kind[lts.initial] == 255) kind[lts.initial] = 0;
  for (std::uint32_t s = 0; s < n; ++s)
    if (kind[s] != 255) {
      r.index[s] = static_cast<std::uint32_t>(r.points.size());
      r.points.push_back(s);
      r.kind.push_back(kind[s]);
    }

  // Macro steps: through transient states, every edge there is silent.
  r.macro.resize(r.points.size());
  std::vector<std::uint32_t> seen(n, UINT32_MAX);
  for (std::uint32_t p = 0; p < r.points.size(); ++p) {
    auto& out = r.macro[p];
    std::vector<std::uint32_t> stack{r.points[p]};
    seen[r.points[p]] = p;
    while (!stack.empty()) {
      auto s = stack.back();
      stack.pop_back();
      for (auto ei : out_edges(s)) {
        const auto& e = lts.edges[ei];
        auto label = label_map[e.label];
        if (r.index[e.to] != UINT32_MAX) {
          out.emplace_back(label, r.index[e.to]);
        } else if (seen[e.to] != p) {
          seen[e.to] = p;
          stack.push_back(e.to);
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  // ε-closures over macro steps, then E* a E*.
  const auto m = static_cast<std::uint32_t>(r.points.size());
  std::vector<std::vector<std::uint32_t>> closure(m);
  std::vector<std::uint32_t> mark(m, UINT32_MAX);
  for (std::uint32_t p = 0; p < m; ++p) {
    auto& c = closure[p];
    c.push_back(p);
    mark[p] = p;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (const auto& [l, t] : r.macro[c[i]])
        if (l == 0 && mark[t] != p) {
          mark[t] = p;
          c.push_back(t);
        }
    std::sort(c.begin(), c.end());
  }
  r.weak.resize(m);
  for (std::uint32_t p = 0; p < m; ++p) {
    auto& w = r.weak[p];
    for (auto u : closure[p]) {
      w.emplace_back(0, u);
      for (const auto& [l, v] : r.macro[u])
        if (l != 0)
          for (auto x : closure[v]) w.emplace_back(l, x);
    }
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
  }
  return r;
}

/// With `part` only partially explored and `whole` complete: a reachable
/// stable state of `part` whose content no state of `whole` has cannot be
/// related to anything, so the path to it refutes bisimilarity.
inline std::optional<WeakBisimResult> refute_partial(const FlatLts& part, const FlatLts& whole, bool part_is_a) {
  std::set<std::uint32_t> contents;
  for (const auto& s : whole.states) contents.insert(s.content);
  std::vector<std::uint32_t> parent(part.states.size(), UINT32_MAX);
  for (std::uint32_t e = 0; e < part.edges.size(); ++e) {
    const auto& ed = part.edges[e];
    if (ed.to != part.initial && parent[ed.to] == UINT32_MAX) parent[ed.to] = e;
  }
  for (std::uint32_t s = 0; s < part.states.size(); ++s) {
    const auto& st = part.states[s];
    if (!st.stable || contents.count(st.content)) continue;
    if (s != part.initial && parent[s] == UINT32_MAX) continue;
    std::vector<std::uint32_t> path;
    for (auto v = s; v != part.initial; v = part.edges[parent[v]].from) path.push_back(parent[v]);
    std::reverse(path.begin(), path.end());
    WeakBisimResult res;
    res.reason = std::string(part_is_a ? "first" : "second") + " LTS (explored partially: " + part.truncation +
                 ") reaches a stable state whose content occurs nowhere in the " +
                 (part_is_a ? "second" : "first") + " LTS";
    auto push = [&](const std::string& label, std::uint32_t v, std::string other) {
      const auto& mine = part.states[v].text();
      res.trace.push_back(part_is_a ? WeakBisimResult::Step{label, mine, std::move(other)}
                                    : WeakBisimResult::Step{label, std::move(other), mine});
    };
    push("", part.initial, whole.states[whole.initial].text());
    for (auto e : path) {
      const auto& ed = part.edges[e];
      if (ed.label != 0) {
        res.witness_label = part.labels[ed.label];
        push(res.witness_label, ed.to, "-");
      }
    }
    if (path.empty() || part.edges[path.back()].label == 0) push(epsilon_label(), s, "-");
    return res;
  }
  return std::nullopt;
}

}  // namespace detail

/// Weak bisimilarity of the initial states, with flat content as part of
/// the observation.
inline WeakBisimResult check_weak_bisim(const FlatLts& a, const FlatLts& b) {
  if (a.truncated != b.truncated) {
    if (auto r = a.truncated ? detail::refute_partial(a, b, true) : detail::refute_partial(b, a, false)) return *r;
  }
  WeakBisimResult res;
  if (a.truncated || b.truncated) {
    res.reason = "refused: " + std::string(a.truncated ? "first" : "second") + " LTS is truncated (" +
                 (a.truncated ? a.truncation : b.truncation) + ")";
    return res;
  }
  // Shared label alphabet; 0 stays ε.
  std::unordered_map<std::string, std::uint32_t> ids{{epsilon_label(), 0}};
  std::vector<std::string> names{epsilon_label()};
  auto remap = [&](const FlatLts& l) {
    std::vector<std::uint32_t> m;
    for (const auto& s : l.labels) {
      auto [it, fresh] = ids.emplace(s, static_cast<std::uint32_t>(names.size()));
      if (fresh) names.push_back(s);
      m.push_back(it->second);
    }
    return m;
  };
  auto ra = detail::reduce(a, remap(a));
  auto rb = detail::reduce(b, remap(b));
  const auto na = static_cast<std::uint32_t>(ra.points.size());
  const auto total = na + static_cast<std::uint32_t>(rb.points.size());
  res.observed_a = na;
  res.observed_b = rb.points.size();

  auto state_of = [&](std::uint32_t u) -> const FlatState& {
    return u < na ? a.states[ra.points[u]] : b.states[rb.points[u - na]];
  };
  auto weak_of = [&](std::uint32_t u) -> const std::vector<std::pair<std::uint32_t, std::uint32_t>>& {
    return u < na ? ra.weak[u] : rb.weak[u - na];
  };
  auto shift = [&](std::uint32_t u, std::uint32_t t) { return u < na ? t : t + na; };
  auto kind_of = [&](std::uint32_t u) { return u < na ? ra.kind[u] : rb.kind[u - na]; };

  // Initial partition: same flat content and same stability.
  std::vector<std::vector<std::uint32_t>> history;
  {
    std::map<std::pair<std::uint32_t, bool>, std::uint32_t> key;
    std::vector<std::uint32_t> block(total);
    for (std::uint32_t u = 0; u < total; ++u) {
      const auto& s = state_of(u);
      bool stable = kind_of(u) == 0;
      block[u] = key.emplace(std::make_pair(s.content, stable), static_cast<std::uint32_t>(key.size())).first->second;
    }
    history.push_back(std::move(block));
  }
  std::size_t count = 0;
  for (auto x : history.back()) count = std::max<std::size_t>(count, x + 1);
  for (;;) {
    const auto& cur = history.back();
    std::map<std::pair<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>>, std::uint32_t> sigs;
    std::vector<std::uint32_t> next(total);
    for (std::uint32_t u = 0; u < total; ++u) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> sig;
      for (const auto& [l, t] : weak_of(u)) sig.emplace_back(l, cur[shift(u, t)]);
      std::sort(sig.begin(), sig.end());
      sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
      next[u] = sigs.emplace(std::make_pair(cur[u], std::move(sig)), static_cast<std::uint32_t>(sigs.size())).first->second;
    }
    std::size_t c = sigs.size();
    history.push_back(std::move(next));
    if (c == count) break;
    count = c;
  }
  const auto& fin = history.back();
  res.blocks = count;
  res.block_a.assign(a.states.size(), UINT32_MAX);
  res.block_b.assign(b.states.size(), UINT32_MAX);
  for (std::uint32_t u = 0; u < na; ++u) res.block_a[ra.points[u]] = fin[u];
  for (std::uint32_t u = na; u < total; ++u) res.block_b[rb.points[u - na]] = fin[u];

  std::uint32_t ia = ra.index[a.initial], ib = na + rb.index[b.initial];
  res.bisimilar = fin[ia] == fin[ib];

  if (res.bisimilar) {
    // Direct check: every related pair matches each other's macro steps weakly.
    bool ok = true;
    std::map<std::uint32_t, std::vector<std::uint32_t>> members;
    for (std::uint32_t u = 0; u < total; ++u) members[fin[u]].push_back(u);
    auto matches = [&](std::uint32_t s, std::uint32_t t) {
      if (state_of(s).content != state_of(t).content) return false;
      const auto& macro = s < na ? ra.macro[s] : rb.macro[s - na];
      for (const auto& [l, s2] : macro) {
        bool found = false;
        for (const auto& [l2, t2] : weak_of(t))
          if (l2 == l && fin[shift(t, t2)] == fin[shift(s, s2)]) {
            found = true;
            break;
          }
        if (!found) return false;
      }
      return true;
    };
    for (const auto& [blk, us] : members)
      for (auto s : us)
        for (auto t : us)
          if ((s < na) != (t < na) && !matches(s, t)) ok = false;
    res.verified = ok;
    if (!ok) {
      res.bisimilar = false;
      res.reason = "relation failed the direct transfer check";
    }
    return res;
  }

  // Counterexample: follow the pair down the refinement history.
  auto split_round = [&](std::uint32_t u, std::uint32_t v) {
    for (std::size_t r = 0; r < history.size(); ++r)
      if (history[r][u] != history[r][v]) return r;
    return history.size();
  };
  auto text_of = [&](std::uint32_t u) { return state_of(u).text() + (kind_of(u) == 0 ? "" : " [transient]"); };
  std::uint32_t p = ia, q = ib;
  res.trace.push_back({"", text_of(p), text_of(q)});
  for (;;) {
    auto r = split_round(p, q);
    if (r == 0) {
      res.witness_label = "content";
      res.reason = "flat states differ";
      break;
    }
    const auto& prev = history[r - 1];
    std::optional<std::pair<std::uint32_t, std::uint32_t>> diff;
    bool swapped = false;
    for (int side = 0; side < 2 && !diff; ++side) {
      auto x = side == 0 ? p : q;
      auto y = side == 0 ? q : p;
      for (const auto& [l, t] : weak_of(x)) {
        bool found = false;
        for (const auto& [l2, t2] : weak_of(y))
          if (l2 == l && prev[shift(y, t2)] == prev[shift(x, t)]) {
            found = true;
            break;
          }
        if (!found) {
          diff = {l, shift(x, t)};
          swapped = side == 1;
          break;
        }
      }
    }
    if (!diff) {
      res.reason = "partition split without a distinguishing step";
      break;
    }
    auto [label, x2] = *diff;
    auto y = swapped ? p : q;
    std::optional<std::uint32_t> best;
    std::size_t best_round = 0;
    for (const auto& [l2, t2] : weak_of(y))
      if (l2 == label) {
        auto cand = shift(y, t2);
        auto sr = split_round(x2, cand);
        if (!best || sr > best_round) {
          best = cand;
          best_round = sr;
        }
      }
    res.witness_label = names[label];
    if (!best) {
      res.reason = std::string(swapped ? "second" : "first") + " side can do '" + names[label] +
                   "', the other side cannot";
      std::string moved = text_of(x2), none = "(no matching step)";
      res.trace.push_back({names[label], swapped ? none : moved, swapped ? moved : none});
      break;
    }
    p = swapped ? *best : x2;
    q = swapped ? x2 : *best;
    res.trace.push_back({names[label], text_of(p), text_of(q)});
  }
  return res;
}

inline void write_counterexample(std::ostream& os, const WeakBisimResult& r) {
  os << "# verdict " << r.verdict() << "\n# " << r.reason << "\n";
  for (const auto& s : r.trace) {
    if (!s.label.empty()) os << "LABEL " << s.label << "\n";
    os << "A " << s.state_a << "\nB " << s.state_b << "\n";
  }
}

struct CertifyResult {
  WeakBisimResult result;
  Lts<Snapshot> dbnet_lts;
  Lts<Marking> cpn_lts;
  TranslationOutput translation;
};

/// build_lts(net) against the LTS of translate(net), flattened and compared.
inline CertifyResult certify_translation(const DbNet& net, const Snapshot& s0, const FreshPolicy& fp,
                                         const Limits& limits, const TranslateOptions& opt = {}) {
  CertifyResult out;
  out.translation = translate(net, s0, opt);
  out.dbnet_lts = build_lts(net, s0, fp, limits);
  out.cpn_lts = CpnEngine(out.translation.net, fp, out.translation.label_map).build_lts(out.translation.net.initial, limits);
  out.result = check_weak_bisim(flatten(out.dbnet_lts, net), flatten(out.cpn_lts, out.translation));
  return out;
}

}  // namespace dbnet
