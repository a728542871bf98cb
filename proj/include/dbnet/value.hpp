#pragma once

#include <array>
#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dbnet/error.hpp"

namespace dbnet {

/// Index of a data type inside a TypeDomain.
struct TypeId {
  std::uint32_t index = 0;
  friend auto operator<=>(const TypeId&, const TypeId&) = default;
};

enum class DataKind { String, Integer, Real, Bool };

/// Type predicates. Inequality and the reversed orderings are expressed by
/// negating a literal or swapping its arguments.
enum class Predicate { Eq, Lt, Le, Succ };

inline const char* kind_name(DataKind k) {
  switch (k) {
    case DataKind::String: return "string";
    case DataKind::Integer: return "int";
    case DataKind::Real: return "real";
    case DataKind::Bool: return "bool";
  }
  return "?";
}

inline std::optional<DataKind> parse_kind(std::string_view s) {
  if (s == "string") return DataKind::String;
  if (s == "int") return DataKind::Integer;
  if (s == "real") return DataKind::Real;
  if (s == "bool") return DataKind::Bool;
  return std::nullopt;
}

inline const char* predicate_name(Predicate p) {
  switch (p) {
    case Predicate::Eq: return "=";
    case Predicate::Lt: return "<";
    case Predicate::Le: return "<=";
    case Predicate::Succ: return "succ";
  }
  return "?";
}

struct DataType {
  std::string name;
  DataKind kind = DataKind::String;

  bool supports(Predicate p) const {
    switch (p) {
      case Predicate::Eq: return true;
      case Predicate::Lt:
      case Predicate::Le: return kind == DataKind::Integer || kind == DataKind::Real;
      case Predicate::Succ: return kind == DataKind::Integer;
    }
    return false;
  }
  bool operator==(const DataType&) const = default;
};

/// Finite set of pairwise disjoint data types. The four standard types
/// (int, string, real, bool) are always present at fixed indices.
class TypeDomain {
 public:
  TypeDomain() {
    types_ = {{"int", DataKind::Integer},
              {"string", DataKind::String},
              {"real", DataKind::Real},
              {"bool", DataKind::Bool}};
  }

  static constexpr TypeId Int{0};
  static constexpr TypeId String{1};
  static constexpr TypeId Real{2};
  static constexpr TypeId Bool{3};
  static constexpr std::size_t builtin_count = 4;

  TypeId add(std::string name, DataKind kind) {
    if (find(name)) throw ValidationError("duplicate type '" + name + "'");
    types_.push_back({std::move(name), kind});
    return TypeId{static_cast<std::uint32_t>(types_.size() - 1)};
  }

  std::optional<TypeId> find(std::string_view name) const {
    for (std::size_t i = 0; i < types_.size(); ++i)
      if (types_[i].name == name) return TypeId{static_cast<std::uint32_t>(i)};
    return std::nullopt;
  }

  TypeId require(std::string_view name) const {
    if (auto t = find(name)) return *t;
    throw SchemaError("unknown type '" + std::string(name) + "'");
  }

  const DataType& at(TypeId id) const {
    if (id.index >= types_.size()) throw SchemaError("unknown type id " + std::to_string(id.index));
    return types_[id.index];
  }
  const std::string& name(TypeId id) const { return at(id).name; }
  DataKind kind(TypeId id) const { return at(id).kind; }
  std::size_t size() const { return types_.size(); }
  TypeId id(std::size_t i) const { return TypeId{static_cast<std::uint32_t>(i)}; }
  bool operator==(const TypeDomain&) const = default;

 private:
  std::vector<DataType> types_;
};

/// Exact decimal: unscaled * 10^-scale, normalised so that equal numbers
/// have equal representations.
class Decimal {
 public:
  Decimal() = default;
  Decimal(std::int64_t unscaled, int scale) : unscaled_(unscaled), scale_(scale) { normalise(); }

  static Decimal parse(std::string_view text) {
    bool neg = false;
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
      neg = text[i] == '-';
      ++i;
    }
    __int128 acc = 0;
    int scale = 0;
    bool dot = false;
    bool digits = false;
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (c == '.' && !dot) {
        dot = true;
        continue;
      }
      if (c < '0' || c > '9') throw TypeError("malformed decimal '" + std::string(text) + "'");
      acc = acc * 10 + (c - '0');
      digits = true;
      if (dot) ++scale;
      if (acc > static_cast<__int128>(INT64_MAX) || scale > 18) throw TypeError("decimal out of range '" + std::string(text) + "'");
    }
    if (!digits) throw TypeError("malformed decimal '" + std::string(text) + "'");
    auto v = static_cast<std::int64_t>(acc);
    return Decimal(neg ? -v : v, scale);
  }

  std::int64_t unscaled() const { return unscaled_; }
  int scale() const { return scale_; }

  std::string str() const {
    unsigned __int128 mag = unscaled_ < 0 ? static_cast<unsigned __int128>(-static_cast<__int128>(unscaled_))
                                          : static_cast<unsigned __int128>(unscaled_);
    std::string digits;
    do {
      digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(mag % 10)));
      mag /= 10;
    } while (mag != 0);
    std::string sign = unscaled_ < 0 ? "-" : "";
    if (scale_ == 0) return sign + digits + ".0";
    while (static_cast<int>(digits.size()) <= scale_) digits.insert(digits.begin(), '0');
    digits.insert(digits.end() - scale_, '.');
    return sign + digits;
  }

  friend bool operator==(const Decimal&, const Decimal&) = default;
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    int s = a.scale_ > b.scale_ ? a.scale_ : b.scale_;
    return widen(a, s) <=> widen(b, s);
  }

 private:
  static __int128 widen(const Decimal& d, int scale) {
    __int128 v = d.unscaled_;
    for (int i = d.scale_; i < scale; ++i) v *= 10;
    return v;
  }
  void normalise() {
    while (scale_ > 0 && unscaled_ % 10 == 0) {
      unscaled_ /= 10;
      --scale_;
    }
    if (unscaled_ == 0) scale_ = 0;
  }

  std::int64_t unscaled_ = 0;
  int scale_ = 0;
};

/// Append-only interning table with lock-free reads. Ids are dense and stay
/// valid for the lifetime of the process.
template <class T, class Hash = std::hash<T>>
class InternTable {
 public:
  InternTable() = default;
  InternTable(const InternTable&) = delete;
  InternTable& operator=(const InternTable&) = delete;
  ~InternTable() {
    for (auto& c : chunks_) delete[] c.load();
  }

  std::uint32_t intern(const T& v) {
    std::lock_guard lock(mu_);
    if (auto it = index_.find(v); it != index_.end()) return it->second;
    auto id = size_;
    auto chunk = id >> kChunkBits;
    if (chunk >= kChunks) throw Error("intern table exhausted");
    if (!chunks_[chunk].load(std::memory_order_relaxed)) chunks_[chunk].store(new T[kChunkSize], std::memory_order_release);
    chunks_[chunk].load(std::memory_order_relaxed)[id & (kChunkSize - 1)] = v;
    index_.emplace(v, id);
    size_ = id + 1;
    return id;
  }

  const T& get(std::uint32_t id) const {
    return chunks_[id >> kChunkBits].load(std::memory_order_acquire)[id & (kChunkSize - 1)];
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return size_;
  }

 private:
  static constexpr std::uint32_t kChunkBits = 14;
  static constexpr std::uint32_t kChunkSize = 1u << kChunkBits;
  static constexpr std::uint32_t kChunks = 1u << 16;

  mutable std::mutex mu_;
  std::unordered_map<T, std::uint32_t, Hash> index_;
  std::array<std::atomic<T*>, kChunks> chunks_{};
  std::uint32_t size_ = 0;
};

inline InternTable<std::string>& string_pool() {
  static InternTable<std::string> pool;
  return pool;
}

/// A typed scalar. Null is an ordinary distinguished value of each type and
/// sorts before every other value of that type. Strings are interned so a
/// Value is a trivially copyable 16-byte record.
class Value {
 public:
  enum class Tag : std::uint8_t { Null, Bool, Int, Real, String };

  Value() = default;

  static Value null(TypeId t) { return Value(t, Tag::Null, 0, 0); }
  static Value integer(std::int64_t v, TypeId t = TypeDomain::Int) { return Value(t, Tag::Int, 0, v); }
  static Value string(std::string_view v, TypeId t = TypeDomain::String) {
    return Value(t, Tag::String, 0, string_pool().intern(std::string(v)));
  }
  static Value real(Decimal d, TypeId t = TypeDomain::Real) {
    return Value(t, Tag::Real, static_cast<std::int8_t>(d.scale()), d.unscaled());
  }
  static Value real(std::string_view text, TypeId t = TypeDomain::Real) { return real(Decimal::parse(text), t); }
  static Value boolean(bool v, TypeId t = TypeDomain::Bool) { return Value(t, Tag::Bool, 0, v ? 1 : 0); }

  TypeId type() const { return TypeId{type_}; }
  Tag tag() const { return tag_; }
  bool is_null() const { return tag_ == Tag::Null; }

  std::int64_t as_int() const { return payload_; }
  bool as_bool() const { return payload_ != 0; }
  Decimal as_decimal() const { return Decimal(payload_, scale_); }
  const std::string& as_string() const { return string_pool().get(static_cast<std::uint32_t>(payload_)); }

  /// Whether the payload shape fits the kind of the value's type.
  bool fits(DataKind k) const {
    switch (tag_) {
      case Tag::Null: return true;
      case Tag::Bool: return k == DataKind::Bool;
      case Tag::Int: return k == DataKind::Integer;
      case Tag::Real: return k == DataKind::Real;
      case Tag::String: return k == DataKind::String;
    }
    return false;
  }

  /// Canonical literal text: strings quoted, reals always with a point.
  std::string text() const {
    switch (tag_) {
      case Tag::Null: return "null";
      case Tag::Bool: return as_bool() ? "true" : "false";
      case Tag::Int: return std::to_string(payload_);
      case Tag::Real: return as_decimal().str();
      case Tag::String: return quote(as_string());
    }
    return "?";
  }

  static std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      out += c;
    }
    out += '"';
    return out;
  }

  friend bool operator==(const Value& a, const Value& b) {
    return a.type_ == b.type_ && a.tag_ == b.tag_ && a.scale_ == b.scale_ && a.payload_ == b.payload_;
  }

  friend std::strong_ordering operator<=>(const Value& a, const Value& b) {
    if (auto c = a.type_ <=> b.type_; c != 0) return c;
    if (auto c = a.tag_ <=> b.tag_; c != 0) return c;
    switch (a.tag_) {
      case Tag::Null: return std::strong_ordering::equal;
      case Tag::Bool:
      case Tag::Int: return a.payload_ <=> b.payload_;
      case Tag::Real: return a.as_decimal() <=> b.as_decimal();
      case Tag::String: {
        if (a.payload_ == b.payload_) return std::strong_ordering::equal;
        int r = a.as_string().compare(b.as_string());
        return r < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
      }
    }
    return std::strong_ordering::equal;
  }

  std::size_t hash() const {
    std::uint64_t h = (static_cast<std::uint64_t>(type_) << 40) ^ (static_cast<std::uint64_t>(tag_) << 32) ^
                      static_cast<std::uint64_t>(static_cast<std::uint8_t>(scale_));
    h ^= static_cast<std::uint64_t>(payload_) * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }

 private:
  Value(TypeId t, Tag tag, std::int8_t scale, std::int64_t payload)
      : type_(t.index), tag_(tag), scale_(scale), payload_(payload) {}

  std::uint32_t type_ = 0;
  Tag tag_ = Tag::Null;
  std::int8_t scale_ = 0;
  std::int64_t payload_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const Value& v) { return os << v.text(); }

using Tuple = std::vector<Value>;

inline std::size_t hash_tuple(const Tuple& t) {
  std::size_t h = t.size();
  for (const auto& v : t) h ^= v.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

struct TupleHash {
  std::size_t operator()(const Tuple& t) const { return hash_tuple(t); }
};

inline std::string tuple_text(const Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ',';
    s += t[i].text();
  }
  return s + ")";
}

/// `Name(v1,...,vn)`: the line format shared by facts and tokens.
inline std::string fact_text(std::string_view name, const Tuple& t) { return std::string(name) + tuple_text(t); }

/// Evaluate a type predicate; values of different types are never related.
inline bool eval_predicate(Predicate p, const Value& a, const Value& b) {
  switch (p) {
    case Predicate::Eq: return a == b;
    case Predicate::Lt: return a.type() == b.type() && a < b;
    case Predicate::Le: return a.type() == b.type() && a <= b;
    case Predicate::Succ:
      return a.type() == b.type() && a.tag() == Value::Tag::Int && b.tag() == Value::Tag::Int &&
             b.as_int() == a.as_int() + 1;
  }
  return false;
}

/// 64-bit FNV-1a, used for the state ids printed in LTS files.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace dbnet

template <>
struct std::hash<dbnet::Value> {
  std::size_t operator()(const dbnet::Value& v) const { return v.hash(); }
};
