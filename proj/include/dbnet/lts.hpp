#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dbnet/value.hpp"

namespace dbnet {

struct Limits {
  std::size_t max_states = 2'000'000;
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  unsigned jobs = 1;
};

inline const std::string& epsilon_label() {
  static const std::string eps = "ε";
  return eps;
}

/// Labelled transition system over explicitly stored states. Label 0 is the
/// silent label. Edges are grouped by source state in increasing order.
template <class State>
struct Lts {
  struct Edge {
    std::uint32_t from;
    std::uint32_t label;
    std::uint32_t to;
    std::uint32_t transition;  // producing transition, or UINT32_MAX
  };

  std::vector<State> states;
  std::vector<std::uint32_t> depth;
  std::uint32_t initial = 0;
  std::vector<Edge> edges;
  std::vector<std::string> labels{epsilon_label()};
  bool truncated = false;
  std::string truncation;

  std::uint32_t intern(const std::string& label) {
    if (label == epsilon_label()) return 0;
    auto it = label_index_.find(label);
    if (it != label_index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(labels.size());
    labels.push_back(label);
    label_index_.emplace(label, id);
    return id;
  }

  const std::string& label(std::uint32_t id) const { return labels[id]; }

  /// offsets[s]..offsets[s+1] index the out-edges of s.
  std::vector<std::uint32_t> out_offsets() const {
    std::vector<std::uint32_t> off(states.size() + 1, 0);
    for (const auto& e : edges) ++off[e.from + 1];
    for (std::size_t i = 1; i < off.size(); ++i) off[i] += off[i - 1];
    return off;
  }

  void sort_edges() {
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.from < b.from; });
  }

 private:
  std::unordered_map<std::string, std::uint32_t> label_index_;
};

template <class State>
struct Step {
  std::string label;  // empty or ε for a silent step
  std::uint32_t transition = std::numeric_limits<std::uint32_t>::max();
  State target;
};

/// Breadth-first exploration from `init`. `successors(state)` returns the
/// steps in a deterministic order. With jobs > 1 each BFS level is expanded
/// in parallel and merged in order, so the result does not depend on jobs.
template <class State, class Hash, class Successors>
Lts<State> explore(State init, Successors&& successors, const Limits& limits) {
  Lts<State> lts;
  std::unordered_map<State, std::uint32_t, Hash> index;
  lts.states.push_back(init);
  lts.depth.push_back(0);
  index.emplace(std::move(init), 0);

  std::size_t level_begin = 0;
  std::uint32_t level = 0;
  while (level_begin < lts.states.size()) {
    std::size_t level_end = lts.states.size();
    std::vector<std::vector<Step<State>>> expanded(level_end - level_begin);
    bool at_depth_limit = level >= limits.max_depth;
    auto work = [&](std::size_t from, std::size_t to) {
      for (std::size_t i = from; i < to; ++i) expanded[i - level_begin] = successors(lts.states[i]);
    };
    unsigned jobs = std::max(1u, limits.jobs);
    std::size_t count = level_end - level_begin;
    if (jobs == 1 || count < 2 * jobs) {
      work(level_begin, level_end);
    } else {
      std::vector<std::thread> pool;
      std::size_t chunk = (count + jobs - 1) / jobs;
      for (unsigned j = 0; j < jobs; ++j) {
        std::size_t a = level_begin + j * chunk;
        std::size_t b = std::min(level_end, a + chunk);
        if (a < b) pool.emplace_back(work, a, b);
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = level_begin; i < level_end; ++i) {
      auto& steps = expanded[i - level_begin];
      if (at_depth_limit) {
        if (!steps.empty()) {
          lts.truncated = true;
          lts.truncation = "depth limit " + std::to_string(limits.max_depth) + " reached";
        }
        continue;
      }
      std::vector<std::pair<std::uint32_t, std::uint32_t>> seen;  // (label, to)
      for (auto& st : steps) {
        std::uint32_t to;
        auto it = index.find(st.target);
        if (it != index.end()) {
          to = it->second;
        } else {
          if (lts.states.size() >= limits.max_states) {
            lts.truncated = true;
            lts.truncation = "state limit " + std::to_string(limits.max_states) + " reached";
            continue;
          }
          to = static_cast<std::uint32_t>(lts.states.size());
          index.emplace(st.target, to);
          lts.states.push_back(std::move(st.target));
          lts.depth.push_back(level + 1);
        }
        auto label = st.label.empty() ? 0u : lts.intern(st.label);
        if (std::find(seen.begin(), seen.end(), std::make_pair(label, to)) != seen.end()) continue;
        seen.emplace_back(label, to);
        lts.edges.push_back({static_cast<std::uint32_t>(i), label, to, st.transition});
      }
    }
    level_begin = level_end;
    ++level;
  }
  return lts;
}

/// Canonical text of a state: sorted fact lines, then sorted token lines.
struct StateText {
  std::vector<std::string> facts;
  std::vector<std::string> tokens;

  std::string body() const {
    std::string s;
    for (const auto& f : facts) s += (s.empty() ? "" : " ") + f;
    s += s.empty() ? "|" : " |";
    for (const auto& t : tokens) s += " " + t;
    return s;
  }
  std::string hash() const { return hex64(fnv1a(body())); }
};

/// Writes `STATE <hash> <facts> | <tokens>` lines in state order followed by
/// `EDGE <hash> <label> <hash>` lines.
template <class State, class TextFn>
void write_lts(std::ostream& os, const Lts<State>& lts, TextFn&& text_of) {
  std::vector<std::string> hashes;
  hashes.reserve(lts.states.size());
  os << "# states " << lts.states.size() << " edges " << lts.edges.size() << " truncated "
     << (lts.truncated ? "yes" : "no") << "\n";
  for (const auto& s : lts.states) {
    StateText t = text_of(s);
    hashes.push_back(t.hash());
    os << "STATE " << hashes.back() << " " << t.body() << "\n";
  }
  for (const auto& e : lts.edges)
    os << "EDGE " << hashes[e.from] << " " << lts.labels[e.label] << " " << hashes[e.to] << "\n";
}

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

template <class State, class TextFn>
void write_lts_dot(std::ostream& os, const Lts<State>& lts, TextFn&& text_of, std::string_view name = "lts") {
  os << "digraph \"" << dot_escape(name) << "\" {\n  rankdir=LR;\n  node [shape=box, fontsize=9];\n";
  for (std::size_t i = 0; i < lts.states.size(); ++i) {
    StateText t = text_of(lts.states[i]);
    std::string label;
    for (const auto& f : t.facts) label += f + "\\n";
    label += "--\\n";
    for (const auto& k : t.tokens) label += k + "\\n";
    std::string esc;
    for (char c : label) {
      if (c == '"') esc += '\\';
      esc += c;
    }
    os << "  s" << i << " [label=\"" << esc << "\"" << (i == lts.initial ? ", penwidth=2" : "") << "];\n";
  }
  for (const auto& e : lts.edges) {
    os << "  s" << e.from << " -> s" << e.to << " [label=\"" << dot_escape(lts.labels[e.label]) << "\""
       << (e.label == 0 ? ", style=dashed" : "") << "];\n";
  }
  os << "}\n";
}

}  // namespace dbnet
