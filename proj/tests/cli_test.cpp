#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "json.hpp"
#include "resil/cli.hpp"
#include "test_support.hpp"

namespace resil {
namespace {

using testing::ScratchDir;
using testing::slurp;
using testing::write_file;

const char* kThreeProtocols = R"({
  "channel": {"kind": "bursty", "p_enter": 0.05, "p_exit": 0.3, "y_calm": 1, "y_burst": 5,
              "burst_correlated": true},
  "protocols": [
    {"kind": "elastic", "Y": 6},
    {"kind": "entelechial", "predictor": {"kind": "window_max", "window": 8}, "epsilon": 1.5},
    {"kind": "antifragile", "epochs_per_review": 50,
     "identity_profile": {"kind": "teleconferencing", "jitter_bound": 0.5}}
  ],
  "steps": 800,
  "seed": 17
})";

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST(CmdChannel, ThreeProtocolsWriteTracesAndComparison) {
  ScratchDir dir("channel");
  write_file(dir / "cfg.json", kThreeProtocols);
  std::ostringstream err;
  const int rc = cli::cmd_channel({dir / "cfg.json", dir / "out", std::nullopt, {}}, err);
  ASSERT_EQ(rc, 0) << err.str();
  for (const char* f : {"elastic.csv", "entelechial.csv", "antifragile.csv", "compare.csv",
                        "elastic.json", "manifest.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  EXPECT_EQ(line_count(slurp(dir / "out" / "elastic.csv")), 801u);
  EXPECT_EQ(line_count(slurp(dir / "out" / "compare.csv")), 4u);

  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "channel");
  EXPECT_EQ(manifest["seed"], 17);
  EXPECT_EQ(manifest["files"].size(), 7u);
}

TEST(CmdChannel, RerunIsByteIdentical) {
  ScratchDir dir("channel-det");
  write_file(dir / "cfg.json", kThreeProtocols);
  std::ostringstream err;
  ASSERT_EQ(cli::cmd_channel({dir / "cfg.json", dir / "a", std::nullopt, {}}, err), 0);
  const auto first = slurp(dir / "a" / "antifragile.csv");
  const auto first_cmp = slurp(dir / "a" / "compare.csv");
  ASSERT_EQ(cli::cmd_channel({dir / "cfg.json", dir / "a", std::nullopt, {}}, err), 0);
  EXPECT_EQ(slurp(dir / "a" / "antifragile.csv"), first);
  EXPECT_EQ(slurp(dir / "a" / "compare.csv"), first_cmp);
}

TEST(CmdChannel, SeedOverrideChangesTheTrace) {
  ScratchDir dir("channel-seed");
  write_file(dir / "cfg.json", kThreeProtocols);
  std::ostringstream err;
  ASSERT_EQ(cli::cmd_channel({dir / "cfg.json", dir / "a", std::nullopt, {}}, err), 0);
  ASSERT_EQ(cli::cmd_channel({dir / "cfg.json", dir / "b", 18, {}}, err), 0);
  EXPECT_NE(slurp(dir / "a" / "elastic.csv"), slurp(dir / "b" / "elastic.csv"));
}

TEST(CmdChannel, MalformedJsonIsAConfigErrorWithLineNumber) {
  ScratchDir dir("channel-bad");
  write_file(dir / "cfg.json", "{\n  \"channel\": {\n    \"kind\": \"constant\",,\n}");
  std::ostringstream err;
  EXPECT_EQ(cli::cmd_channel({dir / "cfg.json", dir / "out", std::nullopt, {}}, err), 2);
  EXPECT_NE(err.str().find("line 3"), std::string::npos) << err.str();
}

TEST(CmdChannel, ValidationAndIoErrors) {
  ScratchDir dir("channel-errors");
  std::ostringstream err;
  EXPECT_EQ(cli::cmd_channel({dir / "missing.json", dir / "out", std::nullopt, {}}, err), 3);

  write_file(dir / "bounds.json",
             R"({"channel":{"kind":"random_walk","y0":3,"step_prob":0.2,"min":5,"max":2},
                 "protocol":{"kind":"elastic","Y":3},"steps":10})");
  EXPECT_EQ(cli::cmd_channel({dir / "bounds.json", dir / "out", std::nullopt, {}}, err), 2);

  write_file(dir / "kind.json",
             R"({"channel":{"kind":"constant","y":2},"protocol":{"kind":"fec"},"steps":10})");
  EXPECT_EQ(cli::cmd_channel({dir / "kind.json", dir / "out", std::nullopt, {}}, err), 2);

  write_file(dir / "dup.json", R"({"channel":{"kind":"constant","y":2},
      "protocols":[{"kind":"elastic","Y":3},{"kind":"elastic","Y":4}],"steps":10})");
  EXPECT_EQ(cli::cmd_channel({dir / "dup.json", dir / "out", std::nullopt, {}}, err), 2);

  write_file(dir / "ok.json",
             R"({"channel":{"kind":"constant","y":2},"protocol":{"kind":"elastic","Y":3},"steps":10})");
  write_file(dir / "blocker", "not a directory");
  EXPECT_EQ(cli::cmd_channel({dir / "ok.json", dir / "blocker" / "out", std::nullopt, {}}, err), 3);
}

TEST(CmdChannel, KnowledgeStoreIsPersistedNextToTheConfig) {
  ScratchDir dir("channel-store");
  write_file(dir / "cfg.json", R"({
    "channel": {"kind": "bursty", "p_enter": 0.1, "p_exit": 0.2, "y_calm": 1, "y_burst": 5},
    "protocol": {"kind": "antifragile"},
    "steps": 600, "seed": 3, "knowledge_store": "lessons.json"})");
  std::ostringstream err;
  ASSERT_EQ(cli::cmd_channel({dir / "cfg.json", dir / "out", std::nullopt, {}}, err), 0) << err.str();
  const auto store = KnowledgeStore::load(dir / "lessons.json");
  ASSERT_FALSE(store.empty());
  EXPECT_EQ(store.find("bursty-high")->algorithm.kind, Algorithm::Kind::Interleaved);

  write_file(dir / "lessons.json", "{\"entries\": 12}");
  EXPECT_EQ(cli::cmd_channel({dir / "cfg.json", dir / "out", std::nullopt, {}}, err), 2);
}

TEST(CmdSentinel, CurveHasOneRowPerFailureCount) {
  ScratchDir dir("curve");
  std::ostringstream err;
  cli::SentinelOptions opt;
  opt.out_dir = dir / "out";
  opt.curve = 100;
  ASSERT_EQ(cli::cmd_sentinel(opt, err), 0) << err.str();
  const auto csv = slurp(dir / "out" / "curve.csv");
  EXPECT_EQ(line_count(csv), 102u);  // header + f = 0..100
  EXPECT_NE(csv.find("\n50,0,1\n"), std::string::npos);
  EXPECT_NE(csv.find("\n51,-1,float_min\n"), std::string::npos);
}

TEST(CmdSentinel, BaselineWithoutCanariesHasNoEstimates) {
  ScratchDir dir("sentinel-base");
  write_file(dir / "cfg.json", R"({"pool_size": 0, "steps": 50, "seed": 9,
                                   "mine": {"p_enter_ts": 0.5}})");
  std::ostringstream err;
  cli::SentinelOptions opt;
  opt.config = dir / "cfg.json";
  opt.out_dir = dir / "out";
  ASSERT_EQ(cli::cmd_sentinel(opt, err), 0) << err.str();
  const auto csv = slurp(dir / "out" / "trace.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) EXPECT_NE(line.find(",,,"), std::string::npos) << line;
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["relationship"], "none");
}

TEST(CmdSentinel, BatchWritesSurvivalRates) {
  ScratchDir dir("sentinel-batch");
  write_file(dir / "cfg.json", R"({"pool_size": 100, "steps": 500, "seed": 1})");
  std::ostringstream err;
  cli::SentinelOptions opt;
  opt.config = dir / "cfg.json";
  opt.out_dir = dir / "out";
  opt.runs = 200;
  ASSERT_EQ(cli::cmd_sentinel(opt, err), 0) << err.str();
  const auto batch = nlohmann::json::parse(slurp(dir / "out" / "batch.json"));
  EXPECT_EQ(batch["runs"], 200);
  EXPECT_GT(batch["survival_rate"].get<double>(), batch["baseline_survival_rate"].get<double>());
}

TEST(CmdSentinel, InvalidScenarioIsAConfigError) {
  ScratchDir dir("sentinel-bad");
  write_file(dir / "cfg.json", R"({"miner": {"perception": ["t", "gas_level"]}})");
  std::ostringstream err;
  cli::SentinelOptions opt;
  opt.config = dir / "cfg.json";
  opt.out_dir = dir / "out";
  EXPECT_EQ(cli::cmd_sentinel(opt, err), 2);
  cli::SentinelOptions nothing;
  nothing.out_dir = dir / "out";
  EXPECT_EQ(cli::cmd_sentinel(nothing, err), 2);
}

TEST(CmdCompare, MinerAgainstCoalMine) {
  const auto miner = R"({"class":"purposeful","figures":{"named":["gas_level","humidity","temperature","vibration"]},"social":false})";
  const auto mine = R"({"class":"random","figures":{"named":["t","gas_level","humidity","temperature"]},"social":false})";
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_compare({miner, mine, false, {}}, out, err), 0) << err.str();
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["commensurable"], false);
  EXPECT_EQ(j["supply"], "incommensurable");
  EXPECT_EQ(j["need_social"], true);
}

TEST(CmdCompare, IdenticalDescriptors) {
  const auto d = R"({"class":"proactive","figures":{"cardinality":2}})";
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_compare({d, d, false, {}}, out, err), 0);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["supply"], 0);
  EXPECT_EQ(j["fit"], 1.0);
  EXPECT_EQ(j["dist"], 0);
}

TEST(CmdCompare, UndersupplyPrintsMinusInf) {
  const auto a = R"({"class":"purposeful","figures":{"named":["1"]}})";
  const auto b = R"({"class":"purposeful","figures":{"named":["1","2"]}})";
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_compare({a, b, false, FitVariant::quadratic()}, out, err), 0);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["supply"], -1);
  EXPECT_EQ(j["fit"], "-inf");
  EXPECT_EQ(j["fit_variant"], "quadratic");
}

TEST(CmdCompare, OrgansFromFiles) {
  ScratchDir dir("organs");
  write_file(dir / "c1.json", R"({
    "M": {"class":"purposeful","figures":{"cardinality":0}},
    "A": {"class":"proactive","figures":{"cardinality":1}},
    "P": {"class":"purposeful","figures":{"cardinality":0}},
    "E": {"class":"purposeful","figures":{"cardinality":0}},
    "K": null, "k_stateful": false})");
  write_file(dir / "c2.json", R"({
    "M": {"class":"purposeful","figures":{"cardinality":0}},
    "A": {"class":"proactive","figures":{"cardinality":2}},
    "P": {"class":"purposeful","figures":{"cardinality":0}},
    "E": {"class":"purposeful","figures":{"cardinality":0}},
    "K": {"class":"purposeful","figures":{"cardinality":0}}, "k_stateful": false})");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_compare({(dir / "c1.json").string(), (dir / "c2.json").string(), true, {}},
                             out, err),
            0)
      << err.str();
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["verdicts"]["M"], "equal");
  EXPECT_EQ(j["verdicts"]["A"], "inferior");
  EXPECT_EQ(j["verdicts"]["K"], "left_absent");
}

TEST(CmdCompare, ParseFailures) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_compare({"{\"class\":", "{}", false, {}}, out, err), 2);
  EXPECT_EQ(cli::cmd_compare({R"({"class":"passive","figures":{"cardinality":1}})",
                              R"({"class":"random","figures":{"cardinality":1}})", false, {}},
                             out, err),
            2);
  EXPECT_EQ(cli::cmd_compare({R"({"class":"random","figures":{"named":["a","a"]}})",
                              R"({"class":"random","figures":{"cardinality":1}})", false, {}},
                             out, err),
            2);
}

}  // namespace
}  // namespace resil
