#pragma once

// Command implementations behind the `resil` executable. Each returns a
// process exit code: 0 success, 2 config error, 3 I/O error, 4 internal
// invariant violation.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "resil/behavior.hpp"
#include "resil/channel.hpp"
#include "resil/error.hpp"
#include "resil/fitness.hpp"
#include "resil/io.hpp"
#include "resil/organs.hpp"
#include "resil/sentinel.hpp"

namespace resil::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitIo = 3,
  kExitInternal = 4,
};

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Io: return kExitIo;
    case Errc::InvalidConfig:
    case Errc::InvalidBounds:
    case Errc::InvalidScenario:
    case Errc::StoreCorrupt:
    case Errc::CardinalityOverflow:
    case Errc::EmptyPool: return kExitConfig;
    default: return kExitInternal;
  }
}

namespace detail {

/// Collects the files a command writes so the manifest can list them.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw Error(Errc::Io, "cannot create " + root_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = root_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(Errc::Io, "short write to " + path.string());
    files_.push_back(name);
  }

  void write_json(const std::string& name, const nlohmann::ordered_json& j) {
    write(name, j.dump(2) + "\n");
  }

  /// Written last; lists everything written before it.
  void write_manifest(const std::string& command, const std::optional<std::string>& config,
                      std::optional<std::uint64_t> seed) {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["config"] = config ? nlohmann::ordered_json(*config) : nlohmann::ordered_json(nullptr);
    m["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    m["out_dir"] = root_.string();
    m["files"] = files_;
    m["tool_version"] = kToolVersion;
    write_json("manifest.json", m);
  }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code_for(ex.code());
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kExitInternal;
  }
}

/// Argument is either inline JSON text or a path to a JSON file.
inline nlohmann::json load_json_argument(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return io::parse_json(arg, "argument");
  return io::parse_json(io::read_file(arg), arg);
}

}  // namespace detail

struct ChannelOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  FitVariant fit_variant = FitVariant::baseline();
};

inline int cmd_channel(const ChannelOptions& opt, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto text = io::read_file(opt.config);
    const auto cfg = io::run_config_from_json(io::parse_json(text, opt.config.string()), opt.seed);

    std::optional<std::filesystem::path> store_path;
    KnowledgeStore store;
    if (cfg.knowledge_store) {
      store_path = std::filesystem::path(*cfg.knowledge_store);
      if (store_path->is_relative()) store_path = opt.config.parent_path() / *store_path;
      store = KnowledgeStore::load(*store_path);
    }

    detail::OutputDir out(opt.out_dir);
    const auto trace = generate_trace(cfg.channel, cfg.steps);
    std::vector<ProtocolRun> runs;
    for (const auto& p : cfg.protocols) {
      auto run = run_protocol(trace, p.config, store);
      run.protocol = p.name;
      std::ostringstream csv;
      write_run_csv(csv, run);
      out.write(p.name + ".csv", csv.str());

      nlohmann::ordered_json summary;
      summary["protocol"] = p.name;
      summary["bootstrap_Y0"] = "y(0)+1";
      summary["aggregates"] = to_json(run.aggregates);
      summary["fit_variant"] = opt.fit_variant.to_string();
      summary["mean_fit"] = mean_fit(run.steps, opt.fit_variant);
      out.write_json(p.name + ".json", summary);
      runs.push_back(std::move(run));
    }
    if (runs.size() > 1) {
      const auto rows = compare_runs(runs);
      std::ostringstream csv;
      write_comparison_csv(csv, rows);
      out.write("compare.csv", csv.str());
    }
    if (store_path) store.save(*store_path);
    out.write_manifest("channel", opt.config.string(), cfg.channel.seed);
    return static_cast<int>(kExitOk);
  });
}

struct SentinelOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir;
  std::optional<std::size_t> curve;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
};

inline int cmd_sentinel(const SentinelOptions& opt, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (!opt.config && !opt.curve)
      throw Error(Errc::InvalidConfig, "sentinel needs a config (-c) or --curve N");
    std::optional<io::ScenarioConfig> cfg;
    if (opt.config)
      cfg = io::scenario_config_from_json(
          io::parse_json(io::read_file(*opt.config), opt.config->string()), opt.seed);
    if (opt.runs && !opt.config) throw Error(Errc::InvalidConfig, "--runs needs a config (-c)");
    if (opt.curve && *opt.curve == 0) throw Error(Errc::InvalidConfig, "--curve needs N >= 1");

    detail::OutputDir out(opt.out_dir);
    if (opt.curve) {
      std::ostringstream csv;
      write_curve_csv(csv, reproduce_supply_fit_curve(*opt.curve));
      out.write("curve.csv", csv.str());
    }
    if (cfg && opt.runs) {
      const auto with = survival_batch(cfg->scenario, cfg->pool_size, cfg->policy, cfg->steps,
                                       cfg->seed, *opt.runs);
      const auto without =
          survival_batch(cfg->scenario, 0, cfg->policy, cfg->steps, cfg->seed, *opt.runs);
      nlohmann::ordered_json j;
      j["runs"] = *opt.runs;
      j["steps"] = cfg->steps;
      j["pool_size"] = cfg->pool_size;
      j["survival_rate"] = with.survival_rate();
      j["evacuations"] = with.evacuated;
      j["mean_canaries_lost"] = with.mean_canaries_lost;
      j["baseline_survival_rate"] = without.survival_rate();
      j["uplift"] = with.survival_rate() - without.survival_rate();
      out.write_json("batch.json", j);
    } else if (cfg) {
      const auto run = simulate(cfg->scenario, cfg->pool_size, cfg->policy, cfg->steps, cfg->seed);
      std::ostringstream csv;
      write_scenario_csv(csv, run);
      out.write("trace.csv", csv.str());
      nlohmann::ordered_json j;
      j["pool_size"] = run.pool_size;
      j["survived"] = run.survived;
      j["evacuation_step"] = run.evacuation_step ? nlohmann::ordered_json(*run.evacuation_step)
                                                 : nlohmann::ordered_json(nullptr);
      j["failure_step"] = run.failure_step ? nlohmann::ordered_json(*run.failure_step)
                                           : nlohmann::ordered_json(nullptr);
      j["canaries_lost"] = run.canaries_lost;
      j["relationship"] = run.pool_size > 0 ? std::string(CollectiveMC::relationship()) : "none";
      out.write_json("summary.json", j);
    }
    out.write_manifest("sentinel", opt.config ? std::optional(opt.config->string()) : std::nullopt,
                       cfg ? std::optional(cfg->seed) : std::nullopt);
    return static_cast<int>(kExitOk);
  });
}

struct CompareOptions {
  std::string a;
  std::string b;
  bool organs = false;
  FitVariant fit_variant = FitVariant::baseline();
};

/// `a` plays the system, `b` the environment.
inline nlohmann::ordered_json compare_descriptors(const BehaviorDescriptor& a,
                                                  const BehaviorDescriptor& b,
                                                  FitVariant variant) {
  nlohmann::ordered_json j;
  j["a"] = io::to_json(a);
  j["b"] = io::to_json(b);
  j["a_precedes_b"] = precedes(a, b);
  j["b_precedes_a"] = precedes(b, a);
  j["commensurable"] = commensurable(a, b);
  j["direction"] = std::string(to_string(resolve_direction(a, b)));
  j["dist"] = dist(a, b);
  if (resolve_direction(a, b) == Direction::Incommensurable) {
    j["supply"] = "incommensurable";
    j["fit"] = nullptr;
  } else {
    const auto s = supply(a, b);
    const auto f = fit(s, variant);
    j["supply"] = s.value;
    j["fit"] = f.is_identity_loss() ? nlohmann::ordered_json("-inf") : nlohmann::ordered_json(f.value());
  }
  j["fit_variant"] = variant.to_string();
  j["need_social"] = detect_need_for_social(a, b);
  return j;
}

inline nlohmann::ordered_json compare_cybernetic(const CyberneticClass& a,
                                                 const CyberneticClass& b) {
  nlohmann::ordered_json verdicts;
  const auto cmp = compare_classes(a, b);
  for (auto o : kAllOrgans)
    verdicts[std::string(to_string(o))] = std::string(to_string(cmp[static_cast<std::size_t>(o)]));
  nlohmann::ordered_json j;
  j["verdicts"] = std::move(verdicts);
  j["class_a"] = std::string(to_string(classify(a)));
  j["class_b"] = std::string(to_string(classify(b)));
  j["warnings_a"] = validate(a);
  j["warnings_b"] = validate(b);
  return j;
}

inline int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto ja = detail::load_json_argument(opt.a);
    const auto jb = detail::load_json_argument(opt.b);
    nlohmann::ordered_json result;
    if (opt.organs)
      result = compare_cybernetic(io::cybernetic_class_from_json(ja), io::cybernetic_class_from_json(jb));
    else
      result = compare_descriptors(io::descriptor_from_json(ja), io::descriptor_from_json(jb),
                                   opt.fit_variant);
    out << result.dump(2) << '\n';
    return static_cast<int>(kExitOk);
  });
}

}  // namespace resil::cli
