#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resil {

enum class Errc {
  CardinalityOverflow,
  IncommensurableBehaviors,
  ContainsUndershoot,
  EmptyTraceOverlap,
  InvalidBounds,
  NoObservations,
  StoreCorrupt,
  TraceMismatch,
  EmptyPool,
  InvalidScenario,
  InvalidConfig,
  Io,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::CardinalityOverflow: return "CardinalityOverflow";
    case Errc::IncommensurableBehaviors: return "IncommensurableBehaviors";
    case Errc::ContainsUndershoot: return "ContainsUndershoot";
    case Errc::EmptyTraceOverlap: return "EmptyTraceOverlap";
    case Errc::InvalidBounds: return "InvalidBounds";
    case Errc::NoObservations: return "NoObservations";
    case Errc::StoreCorrupt: return "StoreCorrupt";
    case Errc::TraceMismatch: return "TraceMismatch";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the Errc codes so
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace resil
