#pragma once

// Behavior descriptors and the order relation between them.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "resil/error.hpp"

namespace resil {

enum class BehaviorClass : std::uint8_t {
  Random = 1,
  Purposeful = 2,
  Reactive = 3,
  Proactive = 4,
  Antifragile = 5,
};

inline constexpr BehaviorClass kAllBehaviorClasses[] = {
    BehaviorClass::Random, BehaviorClass::Purposeful, BehaviorClass::Reactive,
    BehaviorClass::Proactive, BehaviorClass::Antifragile};

/// Projection map: integer identifier of a behavior class, 1..5.
constexpr int pi(BehaviorClass c) noexcept { return static_cast<int>(c); }

constexpr std::string_view to_string(BehaviorClass c) noexcept {
  switch (c) {
    case BehaviorClass::Random: return "random";
    case BehaviorClass::Purposeful: return "purposeful";
    case BehaviorClass::Reactive: return "reactive";
    case BehaviorClass::Proactive: return "proactive";
    case BehaviorClass::Antifragile: return "antifragile";
  }
  return "?";
}

inline std::optional<BehaviorClass> parse_behavior_class(std::string_view s) {
  for (auto c : kAllBehaviorClasses)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

/// Name of a measurable property through which a behavior manifests.
class ContextFigure {
 public:
  explicit ContextFigure(std::string id) : id_(std::move(id)) {
    if (id_.empty()) throw Error(Errc::InvalidConfig, "context figure id must be non-empty");
  }
  ContextFigure(const char* id) : ContextFigure(std::string(id)) {}

  const std::string& id() const noexcept { return id_; }

  friend auto operator<=>(const ContextFigure&, const ContextFigure&) = default;
  friend bool operator==(const ContextFigure&, const ContextFigure&) = default;

 private:
  std::string id_;
};

using FigureSet = std::set<ContextFigure>;

inline bool is_strict_subset(const FigureSet& a, const FigureSet& b) {
  return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline FigureSet set_union(const FigureSet& a, const FigureSet& b) {
  FigureSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

/// Either a named set of context figures or only its cardinality (the
/// behavior order, when the figures are left unspecified).
class FigureSpec {
 public:
  FigureSpec() : repr_(std::uint64_t{0}) {}

  static FigureSpec named(FigureSet figures) {
    FigureSpec s;
    s.repr_ = std::move(figures);
    return s;
  }

  /// Rejects duplicate identifiers.
  static FigureSpec named(const std::vector<std::string>& ids) {
    FigureSet set;
    for (const auto& id : ids)
      if (!set.emplace(id).second)
        throw Error(Errc::InvalidConfig, "duplicate context figure '" + id + "'");
    return named(std::move(set));
  }

  static FigureSpec named(std::initializer_list<const char*> ids) {
    return named(std::vector<std::string>(ids.begin(), ids.end()));
  }

  static FigureSpec cardinality_only(std::uint64_t n) {
    FigureSpec s;
    s.repr_ = n;
    return s;
  }

  bool is_named() const noexcept { return std::holds_alternative<FigureSet>(repr_); }

  /// Precondition: is_named().
  const FigureSet& figures() const { return std::get<FigureSet>(repr_); }

  std::uint64_t cardinality() const noexcept {
    if (const auto* set = std::get_if<FigureSet>(&repr_)) return set->size();
    return std::get<std::uint64_t>(repr_);
  }

  bool contains(const ContextFigure& f) const { return is_named() && figures().count(f) > 0; }

  friend bool operator==(const FigureSpec&, const FigureSpec&) = default;

 private:
  std::variant<FigureSet, std::uint64_t> repr_;
};

struct BehaviorDescriptor {
  BehaviorClass cls = BehaviorClass::Purposeful;
  FigureSpec figures;
  bool social = false;

  friend bool operator==(const BehaviorDescriptor&, const BehaviorDescriptor&) = default;
};

/// Which clause of the order definition made one behavior precede another.
enum class PrecedenceBasis {
  Inclusion,    // both named, strict subset of figures
  Cardinality,  // at least one side cardinality-only, strictly smaller order
  Social,       // same class, non-social before social
};

/// Clause under which `lhs` precedes `rhs`, if any. Inclusion/cardinality is
/// reported in preference to the social clause when both hold.
inline std::optional<PrecedenceBasis> precedence_basis(const BehaviorDescriptor& lhs,
                                                       const BehaviorDescriptor& rhs) {
  if (pi(lhs.cls) <= pi(rhs.cls)) {
    if (lhs.figures.is_named() && rhs.figures.is_named()) {
      if (is_strict_subset(lhs.figures.figures(), rhs.figures.figures()))
        return PrecedenceBasis::Inclusion;
    } else if (lhs.figures.cardinality() < rhs.figures.cardinality()) {
      return PrecedenceBasis::Cardinality;
    }
  }
  if (pi(lhs.cls) == pi(rhs.cls) && !lhs.social && rhs.social) return PrecedenceBasis::Social;
  return std::nullopt;
}

/// The raw order predicate, evaluated clause by clause with no tie-break.
inline bool precedes(const BehaviorDescriptor& lhs, const BehaviorDescriptor& rhs) {
  return precedence_basis(lhs, rhs).has_value();
}

inline bool commensurable(const BehaviorDescriptor& a, const BehaviorDescriptor& b) {
  return a == b || precedes(a, b) || precedes(b, a);
}

inline constexpr unsigned kClassBits = 3;
inline constexpr unsigned kCardinalityBits = 29;
inline constexpr std::uint64_t kMaxCardinality = (std::uint64_t{1} << kCardinalityBits) - 1;

/// 32-bit word: class identifier in bits 31..29, figure cardinality in
/// bits 28..0. The social flag is not part of the encoding.
inline std::uint32_t encode(const BehaviorDescriptor& b) {
  const auto n = b.figures.cardinality();
  if (n > kMaxCardinality)
    throw Error(Errc::CardinalityOverflow,
                "cardinality " + std::to_string(n) + " does not fit in 29 bits");
  return (static_cast<std::uint32_t>(pi(b.cls)) << kCardinalityBits) |
         static_cast<std::uint32_t>(n);
}

/// Behavioral distance: absolute difference of the encoded words.
inline std::uint64_t dist(const BehaviorDescriptor& a, const BehaviorDescriptor& b) {
  const std::uint32_t ea = encode(a);
  const std::uint32_t eb = encode(b);
  return ea > eb ? ea - eb : eb - ea;
}

}  // namespace resil
