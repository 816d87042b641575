#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "resil/fitness.hpp"
#include "test_support.hpp"

namespace resil {
namespace {

using testing::named;

constexpr auto kPur = BehaviorClass::Purposeful;

BehaviorDescriptor figs(std::initializer_list<const char*> ids) { return named(kPur, ids); }

TEST(ResolveDirection, InclusionBeatsSocialClause) {
  // system (pur, {a,b}, false), environment (pur, {a}, true):
  // environment precedes by inclusion, system precedes by the social clause.
  const auto sys = named(kPur, {"a", "b"}, false);
  const auto env = named(kPur, {"a"}, true);
  ASSERT_TRUE(precedes(sys, env));
  ASSERT_TRUE(precedes(env, sys));
  EXPECT_EQ(resolve_direction(sys, env), Direction::SystemDominates);
  EXPECT_EQ(resolve_direction(env, sys), Direction::EnvironmentDominates);
}

TEST(ResolveDirection, EqualAndIncommensurable) {
  const auto b = figs({"a"});
  EXPECT_EQ(resolve_direction(b, b), Direction::Equal);
  const auto miner = figs({"gas_level", "humidity", "temperature", "vibration"});
  const auto canary = figs({"t", "gas_level", "noise"});
  EXPECT_EQ(resolve_direction(miner, canary), Direction::Incommensurable);
}

TEST(ResolveDirection, NeverBothOnUniverse) {
  const auto universe = testing::descriptor_universe();
  for (const auto& a : universe)
    for (const auto& b : universe) {
      const auto ab = resolve_direction(a.descriptor, b.descriptor);
      const auto ba = resolve_direction(b.descriptor, a.descriptor);
      // Mirrored orientation from either side.
      if (ab == Direction::SystemDominates) {
        EXPECT_EQ(ba, Direction::EnvironmentDominates);
      }
      if (ab == Direction::EnvironmentDominates) {
        EXPECT_EQ(ba, Direction::SystemDominates);
      }
      if (ab == Direction::Equal || ab == Direction::Incommensurable) {
        EXPECT_EQ(ab, ba);
      }
    }
}

TEST(Supply, Examples) {
  const auto sys = figs({"1", "2", "3", "4"});
  EXPECT_EQ(supply(sys, figs({"1", "4"})).value, 2);
  EXPECT_EQ(supply(sys, sys).value, 0);
  EXPECT_EQ(supply(sys, figs({"1", "2", "3", "4", "5"})).value, -1);
}

TEST(Supply, IncommensurableThrows) {
  try {
    supply(figs({"a", "b"}), figs({"b", "c"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IncommensurableBehaviors);
  }
}

TEST(Supply, SignCoherenceOnUniverse) {
  const auto universe = testing::descriptor_universe();
  for (const auto& s : universe)
    for (const auto& e : universe) {
      const auto dir = resolve_direction(s.descriptor, e.descriptor);
      if (dir == Direction::Incommensurable) continue;
      const auto v = supply(s.descriptor, e.descriptor).value;
      if (v > 0) {
        EXPECT_EQ(dir, Direction::SystemDominates);
      }
      if (v < 0) {
        EXPECT_EQ(dir, Direction::EnvironmentDominates);
      }
    }
}

TEST(Fit, Examples) {
  EXPECT_EQ(fit({0}), FitOutcome::fit(1.0));
  EXPECT_EQ(fit({2}), FitOutcome::fit(1.0 / 3.0));
  for (auto v : {FitVariant::baseline(), FitVariant::quadratic(), FitVariant::plateau(3)})
    EXPECT_TRUE(fit({-1}, v).is_identity_loss());
  EXPECT_EQ(fit({2}, FitVariant::plateau(3)), FitOutcome::fit(1.0));
  EXPECT_EQ(fit({5}, FitVariant::plateau(3)), FitOutcome::fit(1.0 / 3.0));
  EXPECT_EQ(fit({3}, FitVariant::quadratic()), FitOutcome::fit(1.0 / 10.0));
}

TEST(Fit, PlateauZeroIsBaseline) {
  for (std::int64_t s = -3; s <= 50; ++s)
    EXPECT_EQ(fit({s}, FitVariant::plateau(0)), fit({s}));
}

TEST(Fit, StrictlyDecreasingBeyondPlateauAndBoundedByOne) {
  for (auto v : {FitVariant::baseline(), FitVariant::quadratic(), FitVariant::plateau(4)}) {
    double prev = 2.0;
    for (std::int64_t s = 0; s <= 200; ++s) {
      const double f = fit({s}, v).value();
      EXPECT_LE(f, 1.0);
      if (s > v.width) {
        EXPECT_LT(f, prev);
      }
      prev = f;
    }
  }
}

TEST(FitVariant, Parse) {
  EXPECT_EQ(FitVariant::parse("quadratic").kind, FitVariant::Kind::Quadratic);
  EXPECT_EQ(FitVariant::parse("plateau:7").width, 7);
  EXPECT_THROW(FitVariant::parse("plateau:"), Error);
  EXPECT_THROW(FitVariant::parse("plateau:-1"), Error);
  EXPECT_THROW(FitVariant::parse("cubic"), Error);
}

TEST(Shooting, Examples) {
  EXPECT_EQ(shooting(3, 5, 0), (ShootingRecord{0, ShootKind::Overshoot, 2.0}));
  EXPECT_EQ(shooting(7, 5, 1), (ShootingRecord{1, ShootKind::Undershoot, 2.0}));
  EXPECT_EQ(shooting(5, 5, 2), (ShootingRecord{2, ShootKind::Exact, 0.0}));
}

TEST(Shooting, AgreesWithSupplySign) {
  for (int y = 0; y < 8; ++y)
    for (int Y = 0; Y < 8; ++Y) {
      const auto r = shooting(y, Y, 0);
      const auto f = fit({Y - y});
      EXPECT_EQ(r.kind == ShootKind::Undershoot, f.is_identity_loss());
      EXPECT_EQ(r.kind == ShootKind::Overshoot, Y - y > 0);
    }
}

TEST(CumulativeOvershoot, Examples) {
  std::vector<ShootingRecord> constant;
  for (int t = 0; t < 10; ++t) constant.push_back(shooting(2, 5, t));
  EXPECT_DOUBLE_EQ(cumulative_overshoot(constant, 1.0), 30.0);

  std::vector<ShootingRecord> exact(5, shooting(4, 4, 0));
  EXPECT_EQ(cumulative_overshoot(exact, 1.0), 0.0);

  // Hand-summed oracle: y = 1,3,1,3 under Y = 4 with dt = 0.5.
  const int ys[] = {1, 3, 1, 3};
  double oracle = 0.0;
  std::vector<ShootingRecord> alternating;
  for (int t = 0; t < 4; ++t) {
    alternating.push_back(shooting(ys[t], 4, t));
    oracle += (4 - ys[t]) * 0.5;
  }
  EXPECT_DOUBLE_EQ(oracle, 4.0);
  EXPECT_DOUBLE_EQ(cumulative_overshoot(alternating, 0.5), oracle);
}

TEST(CumulativeOvershoot, RejectsUndershoot) {
  const std::vector<ShootingRecord> recs{shooting(1, 2, 0), shooting(3, 2, 1)};
  try {
    cumulative_overshoot(recs, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ContainsUndershoot);
  }
}

TEST(CumulativeOvershoot, AdditiveOverConcatenation) {
  std::vector<ShootingRecord> a, b;
  for (int t = 0; t < 17; ++t) a.push_back(shooting(t % 3, 4, t));
  for (int t = 0; t < 11; ++t) b.push_back(shooting(t % 5, 6, t));
  auto ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  EXPECT_DOUBLE_EQ(cumulative_overshoot(ab, 0.25),
                   cumulative_overshoot(a, 0.25) + cumulative_overshoot(b, 0.25));
}

TEST(TurbulenceTrace, StepFunctionLookup) {
  TurbulenceTrace tr{{0, figs({"a"})}, {5, figs({"a", "b"})}};
  EXPECT_EQ(tr.at(0), figs({"a"}));
  EXPECT_EQ(tr.at(4), figs({"a"}));
  EXPECT_EQ(tr.at(5), figs({"a", "b"}));
  EXPECT_THROW(tr.push(5, figs({"c"})), Error);
}

TurbulenceTrace segment_environment() {
  return {{0, figs({"1", "2", "3", "4"})},
          {1, figs({"1", "4"})},
          {2, figs({"4"})},
          {3, figs({"1", "2", "3", "4"})},
          {4, figs({"1", "2", "3", "4", "5"})}};
}

TEST(FitTimeline, FiveSegmentReconstruction) {
  const auto system_b = figs({"1", "2", "3", "4"});
  const TurbulenceTrace system{{0, system_b}, {4, system_b}};
  const auto rows = fit_timeline(system, segment_environment());
  ASSERT_EQ(rows.size(), 5u);

  // Oracle: environment sets nested in {1..4} give +(4 - |e|); the five-figure
  // segment strictly contains the system set, giving -(5 - 4).
  const int env_sizes[] = {4, 2, 1, 4, 5};
  for (std::size_t i = 0; i < 5; ++i) {
    const int expected = env_sizes[i] <= 4 ? 4 - env_sizes[i] : -(env_sizes[i] - 4);
    ASSERT_FALSE(rows[i].incommensurable());
    EXPECT_EQ(rows[i].supply->value, expected);
  }
  EXPECT_EQ(*rows[0].fit, FitOutcome::fit(1.0));
  EXPECT_EQ(*rows[1].fit, FitOutcome::fit(1.0 / 3.0));
  EXPECT_EQ(*rows[2].fit, FitOutcome::fit(1.0 / 4.0));
  EXPECT_EQ(*rows[3].fit, FitOutcome::fit(1.0));
  EXPECT_TRUE(rows[4].fit->is_identity_loss());
}

TEST(FitTimeline, IdenticalTraces) {
  const TurbulenceTrace tr{{0, figs({"x"})}, {9, figs({"x"})}};
  for (const auto& r : fit_timeline(tr, tr)) {
    EXPECT_EQ(r.supply->value, 0);
    EXPECT_EQ(*r.fit, FitOutcome::fit(1.0));
  }
}

TEST(FitTimeline, IncommensurableMarkers) {
  const TurbulenceTrace sys{{0, figs({"1", "2"})}, {2, figs({"1", "2"})}};
  const TurbulenceTrace env{{0, figs({"1"})}, {1, figs({"2", "9"})}, {2, figs({"2", "9"})}};
  const auto rows = fit_timeline(sys, env);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].incommensurable());
  EXPECT_TRUE(rows[1].incommensurable());
  EXPECT_TRUE(rows[2].incommensurable());

  std::ostringstream csv;
  write_timeline_csv(csv, rows);
  EXPECT_EQ(csv.str(), "t,supply,fit,marker\n0,1,0.5,\n1,,,incommensurable\n2,,,incommensurable\n");
}

TEST(FitTimeline, EmptyOverlap) {
  const TurbulenceTrace a{{0, figs({"1"})}, {3, figs({"1"})}};
  const TurbulenceTrace b{{5, figs({"1"})}};
  EXPECT_THROW(fit_timeline(a, b), Error);
  EXPECT_THROW(fit_timeline(a, TurbulenceTrace{}), Error);
}

TEST(FitTimeline, CsvUsesMinusInfForIdentityLoss) {
  const TurbulenceTrace sys{{0, figs({"1"})}};
  const TurbulenceTrace env{{0, figs({"1", "2"})}};
  std::ostringstream csv;
  write_timeline_csv(csv, fit_timeline(sys, env));
  EXPECT_EQ(csv.str(), "t,supply,fit,marker\n0,-1,-inf,\n");
}

}  // namespace
}  // namespace resil
