#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbnet/value.hpp"

namespace dbnet {

inline InternTable<Tuple, TupleHash>& tuple_pool() {
  static InternTable<Tuple, TupleHash> pool;
  return pool;
}

inline std::strong_ordering compare_tuples(const Tuple& a, const Tuple& b) {
  auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (auto c = a[i] <=> b[i]; c != 0) return c;
  return a.size() <=> b.size();
}

/// Multiset of tuples spread over numbered slots (places or relations).
/// Entries are kept sorted by slot, then by tuple content, so two equal bags
/// have identical entry vectors and iteration order never depends on the
/// order in which tuples were first seen.
class Bag {
 public:
  struct Entry {
    std::uint32_t slot;
    std::uint32_t id;
    std::uint32_t count;
    const Tuple& tuple() const { return tuple_pool().get(id); }
    bool operator==(const Entry&) const = default;
  };

  std::uint32_t count(std::uint32_t slot, const Tuple& t) const {
    auto it = find(slot, t);
    return it != entries_.end() && it->slot == slot && it->tuple() == t ? it->count : 0;
  }

  void add(std::uint32_t slot, const Tuple& t, std::uint32_t n = 1) {
    if (n == 0) return;
    auto it = find(slot, t);
    if (it != entries_.end() && it->slot == slot && it->tuple() == t) {
      it->count += n;
      return;
    }
    entries_.insert(it, Entry{slot, tuple_pool().intern(t), n});
  }

  /// Removes n copies; false (and no change) when fewer are present.
  bool remove(std::uint32_t slot, const Tuple& t, std::uint32_t n = 1) {
    auto it = find(slot, t);
    if (it == entries_.end() || it->slot != slot || it->tuple() != t || it->count < n) return false;
    it->count -= n;
    if (it->count == 0) entries_.erase(it);
    return true;
  }

  void clear_slot(std::uint32_t slot) {
    auto r = range(slot);
    auto first = entries_.begin() + (r.data() - entries_.data());
    entries_.erase(first, first + static_cast<std::ptrdiff_t>(r.size()));
  }

  std::span<const Entry> range(std::uint32_t slot) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), slot,
                               [](const Entry& e, std::uint32_t s) { return e.slot < s; });
    auto hi = std::lower_bound(lo, entries_.end(), slot + 1, [](const Entry& e, std::uint32_t s) { return e.slot < s; });
    return {entries_.data() + (lo - entries_.begin()), static_cast<std::size_t>(hi - lo)};
  }

  std::size_t size(std::uint32_t slot) const {
    std::size_t n = 0;
    for (const auto& e : range(slot)) n += e.count;
    return n;
  }
  bool empty(std::uint32_t slot) const { return range(slot).empty(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  std::size_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& e : entries_) {
      h ^= (static_cast<std::uint64_t>(e.slot) << 40) ^ (static_cast<std::uint64_t>(e.id) << 8) ^ e.count;
      h *= 0x100000001b3ULL;
      h ^= h >> 31;
    }
    return static_cast<std::size_t>(h);
  }

  bool operator==(const Bag&) const = default;

 private:
  std::vector<Entry>::iterator find(std::uint32_t slot, const Tuple& t) {
    return std::lower_bound(entries_.begin(), entries_.end(), 0, [&](const Entry& e, int) {
      if (e.slot != slot) return e.slot < slot;
      return compare_tuples(e.tuple(), t) < 0;
    });
  }
  std::vector<Entry>::const_iterator find(std::uint32_t slot, const Tuple& t) const {
    return const_cast<Bag*>(this)->find(slot, t);
  }

  std::vector<Entry> entries_;
};

}  // namespace dbnet
