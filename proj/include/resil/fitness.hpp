#pragma once

// Supply, system-environment fit, and over/undershoot accounting.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resil/behavior.hpp"
#include "resil/error.hpp"
#include "resil/format.hpp"

namespace resil {

enum class Direction {
  SystemDominates,       // environment precedes system
  EnvironmentDominates,  // system precedes environment
  Equal,
  Incommensurable,
};

constexpr std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::SystemDominates: return "system_dominates";
    case Direction::EnvironmentDominates: return "environment_dominates";
    case Direction::Equal: return "equal";
    case Direction::Incommensurable: return "incommensurable";
  }
  return "?";
}

/// Orients a system/environment pair. The raw order can hold in both
/// directions when one direction comes from figure inclusion and the other
/// from the social clause; inclusion wins.
inline Direction resolve_direction(const BehaviorDescriptor& system,
                                   const BehaviorDescriptor& env) {
  if (system == env) return Direction::Equal;
  const auto env_first = precedence_basis(env, system);
  const auto sys_first = precedence_basis(system, env);
  if (env_first && sys_first) {
    // Inclusion and cardinality are mutually exclusive across directions,
    // so exactly one side rests on the social clause here.
    return *env_first == PrecedenceBasis::Social ? Direction::EnvironmentDominates
                                                 : Direction::SystemDominates;
  }
  if (env_first) return Direction::SystemDominates;
  if (sys_first) return Direction::EnvironmentDominates;
  return Direction::Incommensurable;
}

/// Signed behavioral distance. Positive is oversupply, negative undersupply.
struct SupplyValue {
  std::int64_t value = 0;
  friend auto operator<=>(const SupplyValue&, const SupplyValue&) = default;
};

inline SupplyValue supply(const BehaviorDescriptor& system, const BehaviorDescriptor& env) {
  switch (resolve_direction(system, env)) {
    case Direction::Equal: return {0};
    case Direction::SystemDominates: return {static_cast<std::int64_t>(dist(system, env))};
    case Direction::EnvironmentDominates: return {-static_cast<std::int64_t>(dist(system, env))};
    case Direction::Incommensurable: break;
  }
  throw Error(Errc::IncommensurableBehaviors,
              "system and environment behaviors are incommensurable; "
              "a social behavior should be considered");
}

/// Fit in (0, 1], or the identity-loss sentinel for undersupply.
class FitOutcome {
 public:
  static FitOutcome fit(double v) { return FitOutcome(v); }
  static FitOutcome identity_loss() { return FitOutcome(std::nullopt); }

  bool is_identity_loss() const noexcept { return !value_.has_value(); }
  /// Precondition: !is_identity_loss().
  double value() const { return *value_; }
  /// Fit value with identity loss mapped to 0, the infimum of attainable fits.
  double value_or_floor() const noexcept { return value_.value_or(0.0); }

  std::string to_string() const { return value_ ? format_double(*value_) : "-inf"; }

  friend bool operator==(const FitOutcome&, const FitOutcome&) = default;

 private:
  explicit FitOutcome(std::optional<double> v) : value_(v) {}
  std::optional<double> value_;
};

struct FitVariant {
  enum class Kind { Baseline, Quadratic, Plateau };
  Kind kind = Kind::Baseline;
  std::int64_t width = 0;  // Plateau only

  static FitVariant baseline() { return {}; }
  static FitVariant quadratic() { return {Kind::Quadratic, 0}; }
  static FitVariant plateau(std::int64_t w) {
    if (w < 0) throw Error(Errc::InvalidConfig, "plateau width must be non-negative");
    return {Kind::Plateau, w};
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Baseline: return "baseline";
      case Kind::Quadratic: return "quadratic";
      case Kind::Plateau: return "plateau:" + std::to_string(width);
    }
    return "?";
  }

  /// Accepts "baseline", "quadratic" or "plateau:W".
  static FitVariant parse(std::string_view s) {
    if (s == "baseline") return baseline();
    if (s == "quadratic") return quadratic();
    if (s.substr(0, 8) == "plateau:") {
      const std::string digits(s.substr(8));
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw Error(Errc::InvalidConfig, "bad plateau width '" + digits + "'");
      return plateau(std::stoll(digits));
    }
    throw Error(Errc::InvalidConfig, "unknown fit variant '" + std::string(s) + "'");
  }
};

inline FitOutcome fit(SupplyValue s, FitVariant variant = FitVariant::baseline()) {
  if (s.value < 0) return FitOutcome::identity_loss();
  const double x = static_cast<double>(s.value);
  switch (variant.kind) {
    case FitVariant::Kind::Baseline: return FitOutcome::fit(1.0 / (1.0 + x));
    case FitVariant::Kind::Quadratic: return FitOutcome::fit(1.0 / (1.0 + x * x));
    case FitVariant::Kind::Plateau:
      if (s.value <= variant.width) return FitOutcome::fit(1.0);
      return FitOutcome::fit(1.0 / (1.0 + static_cast<double>(s.value - variant.width)));
  }
  return FitOutcome::identity_loss();
}

// ---------------------------------------------------------------------------
// Over/undershooting

enum class ShootKind { Undershoot, Overshoot, Exact };

constexpr std::string_view to_string(ShootKind k) noexcept {
  switch (k) {
    case ShootKind::Undershoot: return "undershoot";
    case ShootKind::Overshoot: return "overshoot";
    case ShootKind::Exact: return "exact";
  }
  return "?";
}

struct ShootingRecord {
  std::int64_t t = 0;
  ShootKind kind = ShootKind::Exact;
  double magnitude = 0.0;

  friend bool operator==(const ShootingRecord&, const ShootingRecord&) = default;
};

/// Compares the required yielding point `y` with the provisioned one `Y`.
inline ShootingRecord shooting(double y, double Y, std::int64_t t) {
  if (y > Y) return {t, ShootKind::Undershoot, y - Y};
  if (Y > y) return {t, ShootKind::Overshoot, Y - y};
  return {t, ShootKind::Exact, 0.0};
}

/// Left-Riemann sum of overshoot magnitudes. Undershoot steps must be
/// accounted for separately.
inline double cumulative_overshoot(std::span<const ShootingRecord> records, double dt) {
  double total = 0.0;
  for (const auto& r : records) {
    if (r.kind == ShootKind::Undershoot)
      throw Error(Errc::ContainsUndershoot,
                  "undershoot at t=" + std::to_string(r.t) + " in overshoot integral");
    total += r.magnitude;
  }
  return total * dt;
}

// ---------------------------------------------------------------------------
// Turbulence traces and fit timelines

/// Piecewise-constant behavior over time: each entry holds until the next.
class TurbulenceTrace {
 public:
  struct Point {
    std::int64_t t;
    BehaviorDescriptor behavior;
  };

  TurbulenceTrace() = default;
  TurbulenceTrace(std::initializer_list<Point> points) {
    for (const auto& p : points) push(p.t, p.behavior);
  }

  void push(std::int64_t t, BehaviorDescriptor b) {
    if (!points_.empty() && t <= points_.back().t)
      throw Error(Errc::InvalidConfig, "turbulence trace time steps must strictly increase");
    points_.push_back({t, std::move(b)});
  }

  bool empty() const noexcept { return points_.empty(); }
  std::int64_t first_t() const { return points_.front().t; }
  std::int64_t last_t() const { return points_.back().t; }
  const std::vector<Point>& points() const noexcept { return points_; }

  /// Precondition: first_t() <= t.
  const BehaviorDescriptor& at(std::int64_t t) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](std::int64_t v, const Point& p) { return v < p.t; });
    return std::prev(it)->behavior;
  }

 private:
  std::vector<Point> points_;
};

struct TimelineRow {
  std::int64_t t = 0;
  std::optional<SupplyValue> supply;  // empty when incommensurable
  std::optional<FitOutcome> fit;

  bool incommensurable() const noexcept { return !supply.has_value(); }
};

/// Supply and fit at every integer step of the range covered by both traces.
inline std::vector<TimelineRow> fit_timeline(const TurbulenceTrace& system,
                                             const TurbulenceTrace& env,
                                             FitVariant variant = FitVariant::baseline()) {
  if (system.empty() || env.empty())
    throw Error(Errc::EmptyTraceOverlap, "empty turbulence trace");
  const auto begin = std::max(system.first_t(), env.first_t());
  const auto end = std::min(system.last_t(), env.last_t());
  if (begin > end) throw Error(Errc::EmptyTraceOverlap, "traces do not overlap in time");

  std::vector<TimelineRow> rows;
  rows.reserve(static_cast<std::size_t>(end - begin + 1));
  for (auto t = begin; t <= end; ++t) {
    const auto& bs = system.at(t);
    const auto& be = env.at(t);
    TimelineRow row{t, std::nullopt, std::nullopt};
    if (resolve_direction(bs, be) != Direction::Incommensurable) {
      row.supply = supply(bs, be);
      row.fit = fit(*row.supply, variant);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_timeline_csv(std::ostream& os, std::span<const TimelineRow> rows) {
  os << "t,supply,fit,marker\n";
  for (const auto& r : rows) {
    os << r.t << ',';
    if (r.incommensurable()) {
      os << ",,incommensurable\n";
    } else {
      os << r.supply->value << ',' << r.fit->to_string() << ",\n";
    }
  }
}

}  // namespace resil
