#pragma once

// MAPE-K cybernetic classes: organ-wise comparison and static classification.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resil/behavior.hpp"
#include "resil/fitness.hpp"

namespace resil {

enum class Organ : std::size_t { M = 0, A = 1, P = 2, E = 3, K = 4 };

inline constexpr Organ kAllOrgans[] = {Organ::M, Organ::A, Organ::P, Organ::E, Organ::K};

constexpr std::string_view to_string(Organ o) noexcept {
  constexpr std::string_view names[] = {"M", "A", "P", "E", "K"};
  return names[static_cast<std::size_t>(o)];
}

/// How a feedback loop is allowed to change the system. Only genotypical
/// feedback may mutate system identity.
enum class FeedbackKind { Exogenous, Parametric, Structural, Genotypical };

constexpr bool may_mutate_identity(FeedbackKind k) noexcept {
  return k == FeedbackKind::Genotypical;
}

/// Behaviors of the five resilience organs; any organ may be absent.
struct CyberneticClass {
  std::array<std::optional<BehaviorDescriptor>, 5> organs;
  bool k_stateful = false;

  std::optional<BehaviorDescriptor>& operator[](Organ o) {
    return organs[static_cast<std::size_t>(o)];
  }
  const std::optional<BehaviorDescriptor>& operator[](Organ o) const {
    return organs[static_cast<std::size_t>(o)];
  }

  friend bool operator==(const CyberneticClass&, const CyberneticClass&) = default;
};

enum class Verdict {
  Inferior,
  Superior,
  Equal,
  Incommensurable,
  BothAbsent,
  LeftAbsent,
  RightAbsent,
};

constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Inferior: return "inferior";
    case Verdict::Superior: return "superior";
    case Verdict::Equal: return "equal";
    case Verdict::Incommensurable: return "incommensurable";
    case Verdict::BothAbsent: return "both_absent";
    case Verdict::LeftAbsent: return "left_absent";
    case Verdict::RightAbsent: return "right_absent";
  }
  return "?";
}

constexpr Verdict mirror(Verdict v) noexcept {
  switch (v) {
    case Verdict::Inferior: return Verdict::Superior;
    case Verdict::Superior: return Verdict::Inferior;
    case Verdict::LeftAbsent: return Verdict::RightAbsent;
    case Verdict::RightAbsent: return Verdict::LeftAbsent;
    default: return v;
  }
}

using OrganComparison = std::array<Verdict, 5>;

// An absent organ sits below every present one, so LeftAbsent reads as
// "left is inferior" and RightAbsent as "left is superior".
inline Verdict compare_organ(const std::optional<BehaviorDescriptor>& left,
                             const std::optional<BehaviorDescriptor>& right) {
  if (!left && !right) return Verdict::BothAbsent;
  if (!left) return Verdict::LeftAbsent;
  if (!right) return Verdict::RightAbsent;
  switch (resolve_direction(*left, *right)) {
    case Direction::Equal: return Verdict::Equal;
    case Direction::SystemDominates: return Verdict::Superior;
    case Direction::EnvironmentDominates: return Verdict::Inferior;
    case Direction::Incommensurable: return Verdict::Incommensurable;
  }
  return Verdict::Incommensurable;
}

inline OrganComparison compare_classes(const CyberneticClass& left, const CyberneticClass& right) {
  OrganComparison out{};
  for (auto o : kAllOrgans) out[static_cast<std::size_t>(o)] = compare_organ(left[o], right[o]);
  return out;
}

enum class ResilienceClass { Elastic, Entelechy, AntifragileCandidate, Unclassified };

constexpr std::string_view to_string(ResilienceClass r) noexcept {
  switch (r) {
    case ResilienceClass::Elastic: return "elastic";
    case ResilienceClass::Entelechy: return "entelechy";
    case ResilienceClass::AntifragileCandidate: return "antifragile_candidate";
    case ResilienceClass::Unclassified: return "unclassified";
  }
  return "?";
}

/// Figures whose presence in the A organ marks it as open to
/// system-environment fit.
inline const FigureSet& fit_awareness_figures() {
  static const FigureSet figures{"supply", "fit", "risk"};
  return figures;
}

inline bool is_fit_aware(const BehaviorDescriptor& b) {
  if (!b.figures.is_named()) return false;
  for (const auto& f : fit_awareness_figures())
    if (b.figures.contains(f)) return true;
  return false;
}

/// Static classification from the organ tuple. Runtime conditions
/// (monotone improvement, experiential learning) are left to the simulator.
inline ResilienceClass classify(const CyberneticClass& c) {
  bool any_present = false;
  bool all_purposeful = true;
  for (const auto& organ : c.organs) {
    if (!organ) continue;
    any_present = true;
    all_purposeful = all_purposeful && organ->cls == BehaviorClass::Purposeful;
  }
  if (!any_present) return ResilienceClass::Unclassified;
  if (all_purposeful) return ResilienceClass::Elastic;

  auto adaptive = [](const std::optional<BehaviorDescriptor>& b) {
    return b && (b->cls == BehaviorClass::Reactive || b->cls == BehaviorClass::Proactive);
  };
  if (!adaptive(c[Organ::A]) || !adaptive(c[Organ::P])) return ResilienceClass::Unclassified;
  if (c[Organ::K] && c.k_stateful && is_fit_aware(*c[Organ::A]))
    return ResilienceClass::AntifragileCandidate;
  return ResilienceClass::Entelechy;
}

/// Non-fatal findings about an organ tuple.
inline std::vector<std::string> validate(const CyberneticClass& c) {
  std::vector<std::string> warnings;
  if (c[Organ::M] && c[Organ::M]->cls == BehaviorClass::Random)
    warnings.emplace_back("M organ declared with random behavior");
  if (c.k_stateful && !c[Organ::K])
    warnings.emplace_back("k_stateful set but K organ is absent");
  return warnings;
}

}  // namespace resil
