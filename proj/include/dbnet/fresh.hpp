#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbnet/value.hpp"

namespace dbnet {

enum class FreshMode { Unbounded, Bounded, Recycling };

/// Where fresh values and external inputs come from.
///
/// Every type has a reservoir, an ordered stream of candidate fresh values.
/// By default it is 1000, 1001, ... for integers, 1000.0, ... for reals,
/// "<type>#1", "<type>#2", ... for string-like types and {false, true} for
/// booleans; a model may replace it with a finite list. A fresh variable
/// always receives a reservoir value absent from the current state:
///  - recycling: the first absent value;
///  - bounded k: any absent value among the first k;
///  - unbounded: the value right after the last reservoir value in use.
/// External variables range over the per-type sample domain.
struct FreshPolicy {
  FreshMode mode = FreshMode::Recycling;
  std::size_t bound = 1;
  std::map<TypeId, std::vector<Value>> reservoirs;
  std::map<TypeId, std::vector<Value>> samples;

  static FreshPolicy recycling() { return {}; }
  static FreshPolicy bounded(std::size_t k) { return {FreshMode::Bounded, k, {}, {}}; }
  static FreshPolicy unbounded() { return {FreshMode::Unbounded, 1, {}, {}}; }

  /// Parses "unbounded", "recycling" or "bounded:k" and keeps the domains.
  void set_mode(std::string_view text) {
    if (text == "unbounded") {
      mode = FreshMode::Unbounded;
    } else if (text == "recycling") {
      mode = FreshMode::Recycling;
    } else if (text.rfind("bounded:", 0) == 0) {
      std::size_t k = 0;
      auto digits = text.substr(8);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
      if (ec != std::errc() || p != digits.data() + digits.size() || k == 0)
        throw ValidationError("bad fresh bound in '" + std::string(text) + "'");
      mode = FreshMode::Bounded;
      bound = k;
    } else {
      throw ValidationError("unknown fresh policy '" + std::string(text) + "'");
    }
  }

  std::string mode_text() const {
    switch (mode) {
      case FreshMode::Unbounded: return "unbounded";
      case FreshMode::Recycling: return "recycling";
      case FreshMode::Bounded: return "bounded:" + std::to_string(bound);
    }
    return "?";
  }

  const std::vector<Value>* sample(TypeId t) const {
    auto it = samples.find(t);
    return it == samples.end() ? nullptr : &it->second;
  }

  /// The i-th reservoir value of a type, or nothing past the end of a finite one.
  std::optional<Value> reservoir_value(const TypeDomain& types, TypeId t, std::size_t i) const {
    if (auto it = reservoirs.find(t); it != reservoirs.end()) {
      if (i < it->second.size()) return it->second[i];
      return std::nullopt;
    }
    switch (types.kind(t)) {
      case DataKind::Integer: return Value::integer(1000 + static_cast<std::int64_t>(i), t);
      case DataKind::Real: return Value::real(Decimal(1000 + static_cast<std::int64_t>(i), 0), t);
      case DataKind::String: return Value::string(types.name(t) + "#" + std::to_string(i + 1), t);
      case DataKind::Bool:
        if (i < 2) return Value::boolean(i == 1, t);
        return std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> reservoir_index(const TypeDomain& types, const Value& v) const {
    auto t = v.type();
    if (auto it = reservoirs.find(t); it != reservoirs.end()) {
      auto pos = std::find(it->second.begin(), it->second.end(), v);
      if (pos == it->second.end()) return std::nullopt;
      return static_cast<std::size_t>(pos - it->second.begin());
    }
    if (v.is_null()) return std::nullopt;
    switch (types.kind(t)) {
      case DataKind::Integer:
        if (v.as_int() >= 1000) return static_cast<std::size_t>(v.as_int() - 1000);
        return std::nullopt;
      case DataKind::Real: {
        auto d = v.as_decimal();
        if (d.scale() == 0 && d.unscaled() >= 1000) return static_cast<std::size_t>(d.unscaled() - 1000);
        return std::nullopt;
      }
      case DataKind::String: {
        const auto& s = v.as_string();
        auto prefix = types.name(t) + "#";
        if (s.rfind(prefix, 0) != 0 || s.size() == prefix.size()) return std::nullopt;
        std::size_t n = 0;
        auto [p, ec] = std::from_chars(s.data() + prefix.size(), s.data() + s.size(), n);
        if (ec != std::errc() || p != s.data() + s.size() || n == 0 || s[prefix.size()] == '0') return std::nullopt;
        return n - 1;
      }
      case DataKind::Bool: return v.as_bool() ? 1 : 0;
    }
    return std::nullopt;
  }

  /// All admissible assignments of fresh values to variables of the given
  /// types, avoiding `used`. Variables of one type receive distinct values.
  std::vector<std::vector<Value>> fresh_choices(const TypeDomain& types, const std::vector<TypeId>& vars,
                                                const std::set<Value>& used) const {
    std::vector<std::vector<Value>> out;
    if (vars.empty()) return {{}};
    std::map<TypeId, std::size_t> count_of;
    for (auto t : vars) ++count_of[t];
    std::map<TypeId, std::vector<Value>> per_type;
    for (const auto& [t, n] : count_of) {
      auto& list = per_type[t];
      switch (mode) {
        case FreshMode::Recycling:
        case FreshMode::Bounded: {
          std::size_t limit = mode == FreshMode::Bounded ? bound : SIZE_MAX;
          for (std::size_t i = 0; i < limit; ++i) {
            auto v = reservoir_value(types, t, i);
            if (!v) break;
            if (used.count(*v)) continue;
            list.push_back(*v);
            if (mode == FreshMode::Recycling && list.size() == n) break;
          }
          break;
        }
        case FreshMode::Unbounded: {
          std::size_t start = 0;
          for (const auto& u : used)
            if (u.type() == t)
              if (auto idx = reservoir_index(types, u)) start = std::max(start, *idx + 1);
          for (std::size_t i = start; i < start + n; ++i)
            if (auto v = reservoir_value(types, t, i)) list.push_back(*v);
          break;
        }
      }
      if (list.size() < n) return out;
    }
    if (mode != FreshMode::Bounded) {
      std::map<TypeId, std::size_t> next;
      std::vector<Value> row;
      for (auto t : vars) row.push_back(per_type[t][next[t]++]);
      out.push_back(std::move(row));
      return out;
    }
    std::vector<Value> row(vars.size());
    std::vector<Value> taken;
    auto rec = [&](auto& self, std::size_t i) -> void {
      if (i == vars.size()) {
        out.push_back(row);
        return;
      }
      for (const auto& v : per_type[vars[i]]) {
        if (std::find(taken.begin(), taken.end(), v) != taken.end()) continue;
        row[i] = v;
        taken.push_back(v);
        self(self, i + 1);
        taken.pop_back();
      }
    };
    rec(rec, 0);
    return out;
  }

  bool operator==(const FreshPolicy&) const = default;
};

}  // namespace dbnet
