#pragma once

// Coal mine / miner / canary: a system that cannot perceive a threat borrows
// the perception of a more susceptible partner by watching it fail.

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "resil/behavior.hpp"
#include "resil/error.hpp"
#include "resil/fitness.hpp"
#include "resil/format.hpp"
#include "resil/random.hpp"

namespace resil {

/// Context figure telling whether the mine is neutral or threatening.
inline const ContextFigure kThreatFigure{"t"};

/// Sentinel returned by estimate_fit on estimated undersupply: the smallest
/// positive normal double.
inline constexpr double kFloatMin = std::numeric_limits<double>::min();

inline std::string format_estimated_fit(double fit) {
  return fit == kFloatMin ? "float_min" : format_double(fit);
}

enum class MineState { Neutral, Threatening };

constexpr std::string_view to_string(MineState s) noexcept {
  return s == MineState::Neutral ? "NS" : "TS";
}

struct CoalMine {
  double p_enter_ts = 0.01;
  double p_exit_ts = 0.1;
  FigureSet context{"t", "gas_level", "humidity", "temperature"};

  BehaviorDescriptor behavior() const {
    return {BehaviorClass::Random, FigureSpec::named(context), false};
  }
};

struct Miner {
  FigureSet perception{"gas_level", "humidity", "temperature", "vibration"};
  double hazard_ts = 0.02;
  /// Evacuate once the estimated supply drops below this margin.
  double evacuation_threshold = 25.0;

  BehaviorDescriptor monitor() const {
    return {BehaviorClass::Purposeful, FigureSpec::named(perception), false};
  }
};

struct Canary {
  FigureSet perception{"t", "gas_level", "noise"};
  double hazard_ts = 0.3;

  BehaviorDescriptor monitor() const {
    return {BehaviorClass::Purposeful, FigureSpec::named(perception), false};
  }
};

struct Scenario {
  CoalMine mine;
  Miner miner;
  Canary canary;
};

/// Miner plus a pool of canaries acting as one social system.
struct CollectiveMC {
  Miner miner;
  Canary canary;
  std::size_t pool_size = 0;

  BehaviorDescriptor monitor() const {
    return {BehaviorClass::Purposeful,
            FigureSpec::named(set_union(miner.perception, canary.perception)), true};
  }

  /// Only the canaries pay for the relationship.
  static constexpr std::string_view relationship() noexcept { return "parasitic"; }
};

/// Throws InvalidScenario unless the figure sets have the required shape:
/// the threat figure is perceived by the canary but not the miner, the
/// miner perceives the rest of the mine's context plus more, miner and
/// canary perceptions are mutually non-nested, and together they strictly
/// cover the mine's context.
inline void validate(const Scenario& s) {
  auto fail = [](const std::string& why) { throw Error(Errc::InvalidScenario, why); };
  auto probability = [&](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(what) + " must lie in [0, 1]");
  };
  probability(s.mine.p_enter_ts, "p_enter_ts");
  probability(s.mine.p_exit_ts, "p_exit_ts");
  probability(s.miner.hazard_ts, "miner hazard_ts");
  probability(s.canary.hazard_ts, "canary hazard_ts");

  const auto& T = s.mine.context;
  const auto& F = s.miner.perception;
  const auto& G = s.canary.perception;
  if (!T.count(kThreatFigure)) fail("mine context must contain the threat figure 't'");
  if (!G.count(kThreatFigure)) fail("canary must perceive the threat figure 't'");
  if (F.count(kThreatFigure)) fail("miner must not perceive the threat figure 't'");
  FigureSet mine_without_threat = T;
  mine_without_threat.erase(kThreatFigure);
  if (!is_strict_subset(mine_without_threat, F))
    fail("miner perception must strictly extend the mine context minus 't'");
  if (std::includes(G.begin(), G.end(), F.begin(), F.end()) ||
      std::includes(F.begin(), F.end(), G.begin(), G.end()))
    fail("miner and canary perceptions must be mutually non-nested");
  if (!is_strict_subset(T, set_union(F, G)))
    fail("joint perception must strictly cover the mine context");
}

inline CollectiveMC form_collective(const Scenario& s, std::size_t pool_size) {
  validate(s);
  return {s.miner, s.canary, pool_size};
}

/// A system should seek a social relationship when it cannot be compared
/// with its environment, or when it is undersupplied.
inline bool detect_need_for_social(const BehaviorDescriptor& system,
                                   const BehaviorDescriptor& env) {
  if (!commensurable(system, env)) return true;
  return supply(system, env).value < 0;
}

struct CanaryPool {
  std::size_t size = 0;
  std::size_t failed = 0;

  std::size_t alive() const noexcept { return size - failed; }
};

inline double estimate_supply(const CanaryPool& pool) {
  if (pool.size == 0) throw Error(Errc::EmptyPool, "canary pool is empty");
  if (pool.failed > pool.size) throw Error(Errc::InvalidScenario, "more failed canaries than deployed");
  return static_cast<double>(pool.size) / 2.0 - static_cast<double>(pool.failed);
}

inline double estimate_fit(const CanaryPool& pool) {
  const double s = estimate_supply(pool);
  return s >= 0.0 ? 1.0 / (1.0 + s) : kFloatMin;
}

struct CurveRow {
  std::size_t failed = 0;
  double supply = 0.0;
  double fit = 0.0;
};

inline std::vector<CurveRow> reproduce_supply_fit_curve(std::size_t pool_size) {
  if (pool_size == 0) throw Error(Errc::EmptyPool, "pool size must be at least 1");
  std::vector<CurveRow> rows;
  rows.reserve(pool_size + 1);
  for (std::size_t f = 0; f <= pool_size; ++f) {
    const CanaryPool pool{pool_size, f};
    rows.push_back({f, estimate_supply(pool), estimate_fit(pool)});
  }
  return rows;
}

inline void write_curve_csv(std::ostream& os, std::span<const CurveRow> rows) {
  os << "f,supply,fit\n";
  for (const auto& r : rows)
    os << r.failed << ',' << format_double(r.supply) << ',' << format_estimated_fit(r.fit) << '\n';
}

struct EvacuationPolicy {
  /// Evacuate when the estimated fit falls below this value; 0 disables.
  double fit_threshold = 0.0;
};

struct ScenarioStep {
  std::int64_t t = 0;
  MineState mine_state = MineState::Neutral;
  std::size_t canaries_alive = 0;
  std::optional<double> supply;  // absent without canaries
  std::optional<double> fit;
  bool miner_alive = true;
  bool evacuated = false;

  friend bool operator==(const ScenarioStep&, const ScenarioStep&) = default;
};

struct ScenarioRun {
  std::vector<ScenarioStep> steps;
  bool survived = true;
  std::optional<std::int64_t> evacuation_step;
  std::optional<std::int64_t> failure_step;
  std::size_t pool_size = 0;
  std::size_t canaries_lost = 0;
};

/// Per step: the mine changes state; in TS each live canary fails with its
/// hazard; a present miner reads the pool and evacuates (for good) if the
/// estimate calls for it; a miner still present in TS then fails with its
/// own hazard. Canaries never recover.
inline ScenarioRun simulate(const Scenario& s, std::size_t pool_size, const EvacuationPolicy& policy,
                            std::size_t steps, std::uint64_t seed) {
  validate(s);
  Rng rng(seed);
  ScenarioRun run;
  run.pool_size = pool_size;
  run.steps.reserve(steps);
  CanaryPool pool{pool_size, 0};
  MineState state = MineState::Neutral;
  bool alive = true;
  bool evacuated = false;

  for (std::size_t i = 0; i < steps; ++i) {
    const auto t = static_cast<std::int64_t>(i);
    if (state == MineState::Neutral)
      state = rng.bernoulli(s.mine.p_enter_ts) ? MineState::Threatening : MineState::Neutral;
    else
      state = rng.bernoulli(s.mine.p_exit_ts) ? MineState::Neutral : MineState::Threatening;

    if (state == MineState::Threatening) {
      const std::size_t live = pool.alive();
      for (std::size_t c = 0; c < live; ++c)
        if (rng.bernoulli(s.canary.hazard_ts)) ++pool.failed;
    }

    ScenarioStep row;
    row.t = t;
    row.mine_state = state;
    row.canaries_alive = pool.alive();
    if (pool.size > 0) {
      row.supply = estimate_supply(pool);
      row.fit = estimate_fit(pool);
    }

    const bool present = alive && !evacuated;
    if (present && row.supply &&
        (*row.fit < policy.fit_threshold || *row.supply < s.miner.evacuation_threshold)) {
      evacuated = true;
      run.evacuation_step = t;
    }
    if (alive && !evacuated && state == MineState::Threatening && rng.bernoulli(s.miner.hazard_ts)) {
      alive = false;
      run.failure_step = t;
    }
    row.miner_alive = alive;
    row.evacuated = evacuated;
    run.steps.push_back(row);
  }
  run.survived = alive;
  run.canaries_lost = pool.failed;
  return run;
}

inline void write_scenario_csv(std::ostream& os, const ScenarioRun& run) {
  os << "t,mine_state,canaries_alive,supply,fit,miner_alive,evacuated\n";
  for (const auto& r : run.steps) {
    os << r.t << ',' << to_string(r.mine_state) << ',' << r.canaries_alive << ','
       << (r.supply ? format_double(*r.supply) : "") << ','
       << (r.fit ? format_estimated_fit(*r.fit) : "") << ',' << (r.miner_alive ? 1 : 0) << ','
       << (r.evacuated ? 1 : 0) << '\n';
  }
}

struct SurvivalStats {
  std::size_t runs = 0;
  std::size_t survived = 0;
  std::size_t evacuated = 0;
  double mean_canaries_lost = 0.0;

  double survival_rate() const noexcept {
    return runs == 0 ? 0.0 : static_cast<double>(survived) / static_cast<double>(runs);
  }
};

/// Run i of the batch uses derive_seed(base_seed, i).
inline SurvivalStats survival_batch(const Scenario& s, std::size_t pool_size,
                                    const EvacuationPolicy& policy, std::size_t steps,
                                    std::uint64_t base_seed, std::size_t runs) {
  SurvivalStats stats;
  stats.runs = runs;
  double lost = 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    const auto run = simulate(s, pool_size, policy, steps, derive_seed(base_seed, i));
    stats.survived += run.survived ? 1 : 0;
    stats.evacuated += run.evacuation_step ? 1 : 0;
    lost += static_cast<double>(run.canaries_lost);
  }
  stats.mean_canaries_lost = runs == 0 ? 0.0 : lost / static_cast<double>(runs);
  return stats;
}

}  // namespace resil
