#pragma once

// JSON forms of descriptors, cybernetic classes, and experiment configs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "resil/behavior.hpp"
#include "resil/channel.hpp"
#include "resil/error.hpp"
#include "resil/organs.hpp"
#include "resil/sentinel.hpp"

namespace resil::io {

using nlohmann::json;
using nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parse failures carry nlohmann's line/column diagnostic.
inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& ex) {
    throw Error(Errc::InvalidConfig, origin + ": " + ex.what());
  }
}

namespace detail {

template <typename F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& ex) {
    throw Error(Errc::InvalidConfig, what + ": " + ex.what());
  }
}

inline FigureSet figure_set(const json& j) {
  return FigureSpec::named(j.get<std::vector<std::string>>()).figures();
}

inline ordered_json figure_list(const FigureSet& set) {
  ordered_json arr = ordered_json::array();
  for (const auto& f : set) arr.push_back(f.id());
  return arr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Behavior descriptors and cybernetic classes

inline BehaviorDescriptor descriptor_from_json(const json& j) {
  return detail::guarded("behavior descriptor", [&] {
    BehaviorDescriptor b;
    const auto name = j.at("class").get<std::string>();
    const auto cls = parse_behavior_class(name);
    if (!cls) throw Error(Errc::InvalidConfig, "unknown behavior class '" + name + "'");
    b.cls = *cls;
    const auto& figs = j.at("figures");
    if (figs.contains("named") == figs.contains("cardinality"))
      throw Error(Errc::InvalidConfig, "figures must hold exactly one of 'named' or 'cardinality'");
    if (figs.contains("named"))
      b.figures = FigureSpec::named(figs.at("named").get<std::vector<std::string>>());
    else
      b.figures = FigureSpec::cardinality_only(figs.at("cardinality").get<std::uint64_t>());
    b.social = j.value("social", false);
    return b;
  });
}

inline ordered_json to_json(const BehaviorDescriptor& b) {
  ordered_json j;
  j["class"] = std::string(to_string(b.cls));
  ordered_json figs;
  if (b.figures.is_named())
    figs["named"] = detail::figure_list(b.figures.figures());
  else
    figs["cardinality"] = b.figures.cardinality();
  j["figures"] = std::move(figs);
  j["social"] = b.social;
  return j;
}

inline CyberneticClass cybernetic_class_from_json(const json& j) {
  return detail::guarded("cybernetic class", [&] {
    CyberneticClass c;
    for (auto organ : kAllOrgans) {
      const std::string key(to_string(organ));
      if (j.contains(key) && !j.at(key).is_null()) c[organ] = descriptor_from_json(j.at(key));
    }
    c.k_stateful = j.value("k_stateful", false);
    return c;
  });
}

inline ordered_json to_json(const CyberneticClass& c) {
  ordered_json j;
  for (auto organ : kAllOrgans) {
    const std::string key(to_string(organ));
    j[key] = c[organ] ? to_json(*c[organ]) : ordered_json(nullptr);
  }
  j["k_stateful"] = c.k_stateful;
  return j;
}

// ---------------------------------------------------------------------------
// Channel run config

struct NamedProtocol {
  std::string name;
  ProtocolConfig config;
};

struct RunConfig {
  ChannelModel channel;
  std::vector<NamedProtocol> protocols;
  std::size_t steps = 1000;
  std::optional<std::string> knowledge_store;
};

inline ChannelModel channel_from_json(const json& j, std::uint64_t seed) {
  ChannelModel m;
  m.seed = seed;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    m.kind = ConstantModel{j.at("y").get<int>()};
  } else if (kind == "random_walk") {
    m.kind = RandomWalkModel{j.at("y0").get<int>(), j.at("step_prob").get<double>(),
                             j.at("min").get<int>(), j.at("max").get<int>()};
  } else if (kind == "bursty") {
    m.kind = BurstyModel{j.at("p_enter").get<double>(), j.at("p_exit").get<double>(),
                         j.at("y_calm").get<int>(), j.at("y_burst").get<int>(),
                         j.value("burst_correlated", true)};
  } else {
    throw Error(Errc::InvalidConfig, "unknown channel kind '" + kind + "'");
  }
  return m;
}

inline PredictorSpec predictor_from_json(const json& j) {
  const auto kind = j.value("kind", std::string("window_max"));
  if (kind == "window_max") return WindowMax{j.value("window", kDefaultWindow)};
  if (kind == "ewma_plus_slope") return EwmaPlusSlope{j.value("alpha", 0.3), j.value("horizon", 1)};
  throw Error(Errc::InvalidConfig, "unknown predictor kind '" + kind + "'");
}

inline IdentityProfile identity_profile_from_json(const json& j) {
  const auto kind = j.value("kind", std::string("file_transfer"));
  if (kind == "file_transfer") return FileTransfer{};
  if (kind == "teleconferencing") return Teleconferencing{j.at("jitter_bound").get<double>()};
  throw Error(Errc::InvalidConfig, "unknown identity profile '" + kind + "'");
}

inline NamedProtocol protocol_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  NamedProtocol p;
  p.name = j.value("name", kind);
  const json empty = json::object();
  if (kind == "elastic") {
    p.config = ElasticFixed{j.at("Y").get<int>()};
  } else if (kind == "entelechial") {
    p.config = EntelechialAdaptive{predictor_from_json(j.value("predictor", empty)),
                                   j.value("epsilon", 1.5)};
  } else if (kind == "antifragile") {
    p.config = AntifragileEvolving{
        predictor_from_json(j.value("predictor", empty)), j.value("epsilon", 1.5),
        j.value("epochs_per_review", kDefaultEpochsPerReview),
        identity_profile_from_json(j.value("identity_profile", empty)),
        j.value("burstiness_threshold", kDefaultBurstinessThreshold)};
  } else {
    throw Error(Errc::InvalidConfig, "unknown protocol kind '" + kind + "'");
  }
  if (p.name.empty() || p.name.find_first_of("/\\") != std::string::npos)
    throw Error(Errc::InvalidConfig, "protocol name '" + p.name + "' is not a valid file stem");
  validate(p.config);
  return p;
}

/// Accepts either "protocol": {...} or "protocols": [...].
inline RunConfig run_config_from_json(const json& j, std::optional<std::uint64_t> seed_override) {
  return detail::guarded("run config", [&] {
    RunConfig cfg;
    const std::uint64_t seed = seed_override.value_or(j.value("seed", std::uint64_t{0}));
    cfg.channel = channel_from_json(j.at("channel"), seed);
    validate(cfg.channel);
    if (j.contains("protocols")) {
      for (const auto& p : j.at("protocols")) cfg.protocols.push_back(protocol_from_json(p));
    } else {
      cfg.protocols.push_back(protocol_from_json(j.at("protocol")));
    }
    if (cfg.protocols.empty()) throw Error(Errc::InvalidConfig, "no protocol listed");
    for (std::size_t a = 0; a < cfg.protocols.size(); ++a)
      for (std::size_t b = a + 1; b < cfg.protocols.size(); ++b)
        if (cfg.protocols[a].name == cfg.protocols[b].name)
          throw Error(Errc::InvalidConfig, "duplicate protocol name '" + cfg.protocols[a].name + "'");
    const auto steps = j.at("steps").get<std::int64_t>();
    if (steps < 1) throw Error(Errc::InvalidConfig, "steps must be at least 1");
    cfg.steps = static_cast<std::size_t>(steps);
    if (j.contains("knowledge_store") && !j.at("knowledge_store").is_null())
      cfg.knowledge_store = j.at("knowledge_store").get<std::string>();
    return cfg;
  });
}

// ---------------------------------------------------------------------------
// Sentinel scenario config

struct ScenarioConfig {
  Scenario scenario;
  std::size_t pool_size = 100;
  EvacuationPolicy policy;
  std::size_t steps = 500;
  std::uint64_t seed = 0;
};

inline ScenarioConfig scenario_config_from_json(const json& j,
                                                std::optional<std::uint64_t> seed_override) {
  return detail::guarded("scenario config", [&] {
    ScenarioConfig cfg;
    const json empty = json::object();
    const auto& mine = j.value("mine", empty);
    cfg.scenario.mine.p_enter_ts = mine.value("p_enter_ts", cfg.scenario.mine.p_enter_ts);
    cfg.scenario.mine.p_exit_ts = mine.value("p_exit_ts", cfg.scenario.mine.p_exit_ts);
    if (mine.contains("context")) cfg.scenario.mine.context = detail::figure_set(mine.at("context"));

    const auto& miner = j.value("miner", empty);
    if (miner.contains("perception"))
      cfg.scenario.miner.perception = detail::figure_set(miner.at("perception"));
    cfg.scenario.miner.hazard_ts = miner.value("hazard_ts", cfg.scenario.miner.hazard_ts);
    cfg.scenario.miner.evacuation_threshold =
        miner.value("evacuation_threshold", cfg.scenario.miner.evacuation_threshold);

    const auto& canary = j.value("canary", empty);
    if (canary.contains("perception"))
      cfg.scenario.canary.perception = detail::figure_set(canary.at("perception"));
    cfg.scenario.canary.hazard_ts = canary.value("hazard_ts", cfg.scenario.canary.hazard_ts);

    const auto pool = j.value("pool_size", std::int64_t{100});
    if (pool < 0) throw Error(Errc::InvalidConfig, "pool_size must be non-negative");
    cfg.pool_size = static_cast<std::size_t>(pool);
    cfg.policy.fit_threshold = j.value("policy", empty).value("fit_threshold", 0.0);
    const auto steps = j.value("steps", std::int64_t{500});
    if (steps < 1) throw Error(Errc::InvalidConfig, "steps must be at least 1");
    cfg.steps = static_cast<std::size_t>(steps);
    cfg.seed = seed_override.value_or(j.value("seed", std::uint64_t{0}));
    try {
      validate(cfg.scenario);
    } catch (const Error& ex) {
      throw Error(Errc::InvalidConfig, ex.what());
    }
    return cfg;
  });
}

}  // namespace resil::io
