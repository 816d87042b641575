#pragma once

// Reliable transmission over an unreliable channel, at the yielding-point
// level of abstraction: y(t) is the minimum redundancy needed at step t and
// a protocol provisions Y copies. Three strategies are simulated: a fixed
// (elastic) Y, a predictor-driven (entelechial) Y(t), and an evolving
// (antifragile) protocol that may switch to interleaved transmission and
// persists what it learned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "resil/error.hpp"
#include "resil/fitness.hpp"
#include "resil/format.hpp"
#include "resil/random.hpp"

namespace resil {

// ---------------------------------------------------------------------------
// Channel models

struct ConstantModel {
  int y = 1;
};

struct RandomWalkModel {
  int y0 = 1;
  double step_prob = 0.0;
  int min = 1;
  int max = 1;
};

/// Two-state calm/burst channel. With burst_correlated the state follows a
/// Markov chain (Gilbert-Elliott style); otherwise each step is drawn
/// independently from the chain's stationary burst probability.
struct BurstyModel {
  double p_enter = 0.0;
  double p_exit = 1.0;
  int y_calm = 1;
  int y_burst = 1;
  bool burst_correlated = true;
};

struct ChannelModel {
  std::variant<ConstantModel, RandomWalkModel, BurstyModel> kind;
  std::uint64_t seed = 0;
};

/// Required yielding point per step.
using ChannelTrace = std::vector<int>;

namespace detail {

inline void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(Errc::InvalidBounds, std::string(what) + " must lie in [0, 1]");
}

inline void require_positive(int y, const char* what) {
  if (y < 1) throw Error(Errc::InvalidBounds, std::string(what) + " must be a positive integer");
}

}  // namespace detail

inline void validate(const ChannelModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          detail::require_positive(m.y, "constant y");
        } else if constexpr (std::is_same_v<T, RandomWalkModel>) {
          detail::require_positive(m.min, "random-walk min");
          if (m.min > m.max) throw Error(Errc::InvalidBounds, "random-walk min exceeds max");
          if (m.y0 < m.min || m.y0 > m.max)
            throw Error(Errc::InvalidBounds, "random-walk y0 outside [min, max]");
          detail::require_probability(m.step_prob, "step_prob");
        } else {
          detail::require_probability(m.p_enter, "p_enter");
          detail::require_probability(m.p_exit, "p_exit");
          detail::require_positive(m.y_calm, "y_calm");
          detail::require_positive(m.y_burst, "y_burst");
        }
      },
      model.kind);
}

inline ChannelTrace generate_trace(const ChannelModel& model, std::size_t steps) {
  if (steps < 1) throw Error(Errc::InvalidBounds, "steps must be at least 1");
  validate(model);
  Rng rng(model.seed);
  ChannelTrace trace;
  trace.reserve(steps);

  if (const auto* m = std::get_if<ConstantModel>(&model.kind)) {
    trace.assign(steps, m->y);
  } else if (const auto* m = std::get_if<RandomWalkModel>(&model.kind)) {
    int y = m->y0;
    trace.push_back(y);
    for (std::size_t t = 1; t < steps; ++t) {
      if (rng.bernoulli(m->step_prob)) {
        y += rng.bernoulli(0.5) ? 1 : -1;
        y = std::clamp(y, m->min, m->max);
      }
      trace.push_back(y);
    }
  } else {
    const auto& b = std::get<BurstyModel>(model.kind);
    const double denom = b.p_enter + b.p_exit;
    const double stationary = denom > 0.0 ? b.p_enter / denom : 0.0;
    bool burst = false;
    for (std::size_t t = 0; t < steps; ++t) {
      if (b.burst_correlated)
        burst = burst ? !rng.bernoulli(b.p_exit) : rng.bernoulli(b.p_enter);
      else
        burst = rng.bernoulli(stationary);
      trace.push_back(burst ? b.y_burst : b.y_calm);
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Predictors

inline constexpr std::size_t kDefaultWindow = 8;

struct WindowMax {
  std::size_t window = kDefaultWindow;
};

/// Holt-style level plus trend, extrapolated `horizon` steps ahead.
struct EwmaPlusSlope {
  double alpha = 0.3;
  int horizon = 1;
};

using PredictorSpec = std::variant<WindowMax, EwmaPlusSlope>;

inline void validate(const PredictorSpec& spec) {
  if (const auto* w = std::get_if<WindowMax>(&spec)) {
    if (w->window < 1) throw Error(Errc::InvalidConfig, "window must be positive");
  } else {
    const auto& e = std::get<EwmaPlusSlope>(spec);
    if (!(e.alpha > 0.0 && e.alpha <= 1.0))
      throw Error(Errc::InvalidConfig, "alpha must lie in (0, 1]");
    if (e.horizon < 1) throw Error(Errc::InvalidConfig, "horizon must be positive");
  }
}

class Predictor {
 public:
  explicit Predictor(PredictorSpec spec = WindowMax{}) : spec_(spec) {
    validate(spec_);
    if (const auto* w = std::get_if<WindowMax>(&spec_)) window_ = w->window;
  }

  void observe(double y) {
    recent_.push_back(y);
    if (recent_.size() > window_) recent_.pop_front();
    if (const auto* e = std::get_if<EwmaPlusSlope>(&spec_)) {
      if (count_ == 0) {
        level_ = y;
        trend_ = 0.0;
      } else {
        // Error-correction form, so a flat series stays exactly flat.
        const double prev = level_;
        const double forecast = level_ + trend_;
        level_ = forecast + e->alpha * (y - forecast);
        trend_ += e->alpha * ((level_ - prev) - trend_);
      }
    }
    ++count_;
  }

  std::size_t observations() const noexcept { return count_; }

  double predict() const {
    require_history();
    if (const auto* e = std::get_if<EwmaPlusSlope>(&spec_)) return level_ + e->horizon * trend_;
    return *std::max_element(recent_.begin(), recent_.end());
  }

  /// Lowest requirement seen in the recent window: the level that copies
  /// spread across distinct steps have to clear.
  double floor() const {
    require_history();
    return *std::min_element(recent_.begin(), recent_.end());
  }

  const PredictorSpec& spec() const noexcept { return spec_; }

 private:
  void require_history() const {
    if (count_ == 0) throw Error(Errc::NoObservations, "predictor has no observations");
  }

  PredictorSpec spec_;
  std::size_t window_ = kDefaultWindow;
  std::deque<double> recent_;
  double level_ = 0.0;
  double trend_ = 0.0;
  std::size_t count_ = 0;
};

struct YieldChoice {
  int Y = 1;
  double prediction = 0.0;
  /// Set when no integer Y satisfies 0 < Y - prediction < epsilon.
  bool margin_warning = false;
};

/// Smallest integer yielding point strictly above the prediction.
inline YieldChoice choose_yield(double prediction, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(Errc::InvalidConfig, "epsilon must be positive");
  const double next = std::floor(prediction) + 1.0;
  const int Y = next < 1.0 ? 1 : static_cast<int>(next);
  return {Y, prediction, (Y - prediction) >= epsilon};
}

inline YieldChoice choose_yield(const Predictor& predictor, double epsilon) {
  return choose_yield(predictor.predict(), epsilon);
}

// ---------------------------------------------------------------------------
// Protocol configuration

struct ElasticFixed {
  int Y = 1;
};

struct EntelechialAdaptive {
  PredictorSpec predictor = WindowMax{};
  double epsilon = 1.5;
};

struct FileTransfer {};

struct Teleconferencing {
  double jitter_bound = 0.5;
};

/// What counts as losing identity: a teleconferencing service cannot
/// tolerate delivery jitter, a file transfer can.
using IdentityProfile = std::variant<FileTransfer, Teleconferencing>;

inline constexpr int kDefaultEpochsPerReview = 50;
inline constexpr double kDefaultBurstinessThreshold = 0.5;

struct AntifragileEvolving {
  PredictorSpec predictor = WindowMax{};
  double epsilon = 1.5;
  int epochs_per_review = kDefaultEpochsPerReview;
  IdentityProfile identity_profile = FileTransfer{};
  double burstiness_threshold = kDefaultBurstinessThreshold;
};

using ProtocolConfig = std::variant<ElasticFixed, EntelechialAdaptive, AntifragileEvolving>;

inline void validate(const ProtocolConfig& config) {
  std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ElasticFixed>) {
          if (c.Y < 1) throw Error(Errc::InvalidConfig, "elastic Y must be positive");
        } else {
          validate(c.predictor);
          if (!(c.epsilon > 0.0)) throw Error(Errc::InvalidConfig, "epsilon must be positive");
          if constexpr (std::is_same_v<T, AntifragileEvolving>) {
            if (c.epochs_per_review < 1)
              throw Error(Errc::InvalidConfig, "epochs_per_review must be positive");
            if (const auto* tc = std::get_if<Teleconferencing>(&c.identity_profile);
                tc && !(tc->jitter_bound >= 0.0))
              throw Error(Errc::InvalidConfig, "jitter_bound must be non-negative");
          }
        }
      },
      config);
}

// ---------------------------------------------------------------------------
// Run records

struct Algorithm {
  enum class Kind { Repetition, Interleaved };
  Kind kind = Kind::Repetition;
  int depth = 1;

  static Algorithm repetition() { return {}; }
  static Algorithm interleaved(int depth) { return {Kind::Interleaved, depth}; }

  bool is_interleaved() const noexcept { return kind == Kind::Interleaved; }

  std::string to_string() const {
    return is_interleaved() ? "interleaved:" + std::to_string(depth) : "repetition";
  }

  friend bool operator==(const Algorithm&, const Algorithm&) = default;
};

struct StepRecord {
  std::int64_t t = 0;
  int y = 0;
  int Y = 0;
  bool delivered = false;
  /// Against the requirement the packet actually faced: y(t) for a single
  /// step burst of copies, the lowest y over the copy steps when interleaved.
  ShootingRecord shooting;
  std::int64_t cost = 0;
  Algorithm algorithm;
  std::optional<double> prediction;  // absent on the bootstrap step
  bool margin_warning = false;
  std::optional<std::int64_t> delivered_at;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RunAggregates {
  std::int64_t steps = 0;
  std::int64_t undershoot_count = 0;
  double cumulative_overshoot = 0.0;
  std::int64_t total_cost = 0;
  double delivered_fraction = 0.0;
  double jitter = 0.0;
  std::int64_t identity_violations = 0;
  std::int64_t mutations = 0;
};

struct ProtocolRun {
  std::string protocol;
  std::vector<StepRecord> steps;
  RunAggregates aggregates;
};

/// Population standard deviation of gaps between consecutive deliveries,
/// taken in send order; late (reordered) deliveries show up as spread.
inline double delivery_jitter(std::span<const StepRecord> steps) {
  std::vector<double> gaps;
  std::optional<std::int64_t> prev;
  for (const auto& s : steps) {
    if (!s.delivered_at) continue;
    if (prev) gaps.push_back(static_cast<double>(*s.delivered_at - *prev));
    prev = s.delivered_at;
  }
  if (gaps.empty()) return 0.0;
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= static_cast<double>(gaps.size());
  double var = 0.0;
  for (double g : gaps) var += (g - mean) * (g - mean);
  return std::sqrt(var / static_cast<double>(gaps.size()));
}

namespace detail {

inline void finalize(ProtocolRun& run) {
  auto& agg = run.aggregates;
  agg.steps = static_cast<std::int64_t>(run.steps.size());
  std::vector<ShootingRecord> overshoots;
  std::int64_t delivered = 0;
  for (const auto& s : run.steps) {
    if (s.shooting.kind == ShootKind::Undershoot)
      ++agg.undershoot_count;
    else
      overshoots.push_back(s.shooting);
    agg.total_cost += s.cost;
    delivered += s.delivered ? 1 : 0;
  }
  agg.cumulative_overshoot = cumulative_overshoot(overshoots, 1.0);
  agg.delivered_fraction =
      run.steps.empty() ? 0.0 : static_cast<double>(delivered) / static_cast<double>(run.steps.size());
  agg.jitter = delivery_jitter(run.steps);
}

inline StepRecord single_step_packet(std::int64_t t, int y, int Y) {
  StepRecord r;
  r.t = t;
  r.y = y;
  r.Y = Y;
  r.delivered = Y > y;
  r.shooting = shooting(y, Y, t);
  r.cost = Y;
  if (r.delivered) r.delivered_at = t;
  return r;
}

// Copies go out at t, t+d, t+2d, ...; the packet arrives with the first
// copy whose step requirement it clears.
inline StepRecord interleaved_packet(const ChannelTrace& trace, std::size_t t, int Y, int depth) {
  StepRecord r;
  r.t = static_cast<std::int64_t>(t);
  r.y = trace[t];
  r.Y = Y;
  int faced = std::numeric_limits<int>::max();
  for (std::size_t k = 0; k < static_cast<std::size_t>(Y); ++k) {
    const std::size_t s = t + k * static_cast<std::size_t>(depth);
    if (s >= trace.size()) break;
    ++r.cost;
    faced = std::min(faced, trace[s]);
    if (!r.delivered_at && trace[s] < Y) r.delivered_at = static_cast<std::int64_t>(s);
  }
  r.delivered = r.delivered_at.has_value();
  r.shooting = shooting(faced, Y, r.t);
  r.algorithm = Algorithm::interleaved(depth);
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Knowledge store

struct KnowledgeEntry {
  std::string signature;
  Algorithm algorithm;
  std::int64_t epoch_learned = 0;

  friend bool operator==(const KnowledgeEntry&, const KnowledgeEntry&) = default;
};

/// Lessons learned, keyed by channel signature. Entries are only ever added.
class KnowledgeStore {
 public:
  const std::vector<KnowledgeEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  const KnowledgeEntry* find(std::string_view signature) const {
    for (const auto& e : entries_)
      if (e.signature == signature) return &e;
    return nullptr;
  }

  /// Returns false (and keeps the existing lesson) if the signature is known.
  bool learn(KnowledgeEntry entry) {
    if (find(entry.signature)) return false;
    entries_.push_back(std::move(entry));
    return true;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& e : entries_) {
      nlohmann::ordered_json j;
      j["signature"] = e.signature;
      j["algorithm"] = e.algorithm.is_interleaved() ? "interleaved" : "repetition";
      j["depth"] = e.algorithm.depth;
      j["epoch_learned"] = e.epoch_learned;
      entries.push_back(std::move(j));
    }
    nlohmann::ordered_json root;
    root["entries"] = std::move(entries);
    return root;
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  static KnowledgeStore from_json(const nlohmann::json& j) {
    KnowledgeStore store;
    try {
      for (const auto& e : j.at("entries")) {
        const auto algo = e.at("algorithm").get<std::string>();
        const int depth = e.value("depth", 1);
        KnowledgeEntry entry;
        entry.signature = e.at("signature").get<std::string>();
        entry.epoch_learned = e.at("epoch_learned").get<std::int64_t>();
        if (algo == "interleaved") {
          if (depth < 1) throw Error(Errc::StoreCorrupt, "interleaving depth must be positive");
          entry.algorithm = Algorithm::interleaved(depth);
        } else if (algo == "repetition") {
          entry.algorithm = Algorithm::repetition();
        } else {
          throw Error(Errc::StoreCorrupt, "unknown algorithm '" + algo + "'");
        }
        if (!store.learn(std::move(entry)))
          throw Error(Errc::StoreCorrupt, "duplicate signature in store");
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::StoreCorrupt, ex.what());
    }
    return store;
  }

  static KnowledgeStore parse(std::string_view text) {
    try {
      return from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::StoreCorrupt, ex.what());
    }
  }

  /// A missing file is an empty store.
  static KnowledgeStore load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return {};
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  /// Write-temp-then-rename so readers never observe a partial file.
  void save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
      out << serialize();
      if (!out) throw Error(Errc::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(Errc::Io, "cannot rename onto " + path.string() + ": " + ec.message());
  }

 private:
  std::vector<KnowledgeEntry> entries_;
};

// ---------------------------------------------------------------------------
// Burstiness estimation (the antifragile protocol's A organ)

struct BurstinessEstimate {
  /// Fraction of stress events that belong to runs of length >= 2.
  double burstiness = 0.0;
  double mean_run_length = 0.0;
  std::size_t events = 0;
};

/// A stress event is a step whose requirement exceeds the window's floor.
inline BurstinessEstimate estimate_burstiness(std::span<const int> ys) {
  BurstinessEstimate est;
  if (ys.empty()) return est;
  const int floor = *std::min_element(ys.begin(), ys.end());
  std::size_t in_long_runs = 0;
  std::size_t runs = 0;
  std::size_t run = 0;
  auto close_run = [&] {
    if (run == 0) return;
    ++runs;
    est.events += run;
    if (run >= 2) in_long_runs += run;
    run = 0;
  };
  for (int y : ys) {
    if (y > floor)
      ++run;
    else
      close_run();
  }
  close_run();
  if (est.events > 0) {
    est.burstiness = static_cast<double>(in_long_runs) / static_cast<double>(est.events);
    est.mean_run_length = static_cast<double>(est.events) / static_cast<double>(runs);
  }
  return est;
}

inline std::string channel_signature(const BurstinessEstimate& est, double threshold) {
  if (est.events == 0) return "calm";
  return est.burstiness > threshold ? "bursty-high" : "bursty-low";
}

inline constexpr int kMinInterleaveDepth = 2;
inline constexpr int kMaxInterleaveDepth = 16;

/// Copies are spread twice the mean burst length apart.
inline int interleave_depth_for(const BurstinessEstimate& est) {
  const int d = 2 * static_cast<int>(std::ceil(est.mean_run_length));
  return std::clamp(d, kMinInterleaveDepth, kMaxInterleaveDepth);
}

// ---------------------------------------------------------------------------
// Protocols

inline ProtocolRun run_elastic(const ChannelTrace& trace, int Y) {
  if (Y < 1) throw Error(Errc::InvalidConfig, "elastic Y must be positive");
  ProtocolRun run;
  run.protocol = "elastic";
  run.steps.reserve(trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t)
    run.steps.push_back(detail::single_step_packet(static_cast<std::int64_t>(t), trace[t], Y));
  detail::finalize(run);
  return run;
}

/// The first step has no history to predict from and provisions y(0)+1.
inline ProtocolRun run_entelechial(const ChannelTrace& trace, const PredictorSpec& spec,
                                   double epsilon) {
  if (!(epsilon > 0.0)) throw Error(Errc::InvalidConfig, "epsilon must be positive");
  Predictor predictor(spec);
  ProtocolRun run;
  run.protocol = "entelechial";
  run.steps.reserve(trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto ts = static_cast<std::int64_t>(t);
    if (t == 0) {
      run.steps.push_back(detail::single_step_packet(ts, trace[t], trace[t] + 1));
    } else {
      const auto choice = choose_yield(predictor, epsilon);
      auto rec = detail::single_step_packet(ts, trace[t], choice.Y);
      rec.prediction = choice.prediction;
      rec.margin_warning = choice.margin_warning;
      run.steps.push_back(rec);
    }
    predictor.observe(trace[t]);
  }
  detail::finalize(run);
  return run;
}

struct ReviewRecord {
  std::int64_t epoch = 0;
  std::int64_t end_t = 0;  // last step covered by the review
  BurstinessEstimate estimate;
  std::string signature;
  Algorithm algorithm;  // in force after the review
  bool mutated = false;
  double jitter = 0.0;
  bool identity_violation = false;
};

struct AntifragileResult {
  ProtocolRun run;
  KnowledgeStore store;
  std::vector<ReviewRecord> reviews;
};

/// Starts from the most recent lesson in `store` (plain repetition when the
/// store is empty). At the end of every review epoch the burstiness of the
/// epoch decides whether to switch to interleaving; a switch reuses a stored
/// lesson for the same channel signature, otherwise a new one is learned
/// and recorded. An epoch with stress events but no burst structure
/// switches back to repetition. Epochs without any stress leave the
/// algorithm alone. Y(t) comes from the same predictor in either mode; a
/// mutation changes where the copies go, not how many there are.
inline AntifragileResult run_antifragile(const ChannelTrace& trace, const AntifragileEvolving& cfg,
                                         KnowledgeStore store) {
  validate(ProtocolConfig{cfg});
  Predictor predictor(cfg.predictor);
  AntifragileResult out;
  auto& run = out.run;
  run.protocol = "antifragile";
  run.steps.reserve(trace.size());

  Algorithm algorithm = store.empty() ? Algorithm::repetition() : store.entries().back().algorithm;
  const auto epoch_len = static_cast<std::size_t>(cfg.epochs_per_review);
  const auto* teleconf = std::get_if<Teleconferencing>(&cfg.identity_profile);

  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto ts = static_cast<std::int64_t>(t);
    std::optional<YieldChoice> choice;
    int Y = trace[t] + 1;
    if (t > 0) {
      choice = choose_yield(predictor, cfg.epsilon);
      Y = choice->Y;
    }
    auto rec = algorithm.is_interleaved()
                   ? detail::interleaved_packet(trace, t, Y, algorithm.depth)
                   : detail::single_step_packet(ts, trace[t], Y);
    if (choice) {
      rec.prediction = choice->prediction;
      rec.margin_warning = choice->margin_warning;
    }
    run.steps.push_back(rec);
    predictor.observe(trace[t]);

    if ((t + 1) % epoch_len != 0) continue;

    ReviewRecord review;
    review.epoch = static_cast<std::int64_t>(t / epoch_len);
    review.end_t = ts;
    const std::span<const int> window(trace.data() + (t + 1 - epoch_len), epoch_len);
    review.estimate = estimate_burstiness(window);
    review.signature = channel_signature(review.estimate, cfg.burstiness_threshold);
    review.jitter = delivery_jitter(std::span(run.steps).last(epoch_len));
    if (teleconf && review.jitter > teleconf->jitter_bound) {
      review.identity_violation = true;
      ++run.aggregates.identity_violations;
    }

    Algorithm next = algorithm;
    if (review.estimate.burstiness > cfg.burstiness_threshold) {
      if (!algorithm.is_interleaved()) {
        if (const auto* known = store.find(review.signature); known && known->algorithm.is_interleaved())
          next = known->algorithm;
        else
          next = Algorithm::interleaved(interleave_depth_for(review.estimate));
      }
    } else if (review.estimate.events > 0 && algorithm.is_interleaved()) {
      next = Algorithm::repetition();
    }
    if (next != algorithm) {
      store.learn({review.signature, next, review.epoch});
      algorithm = next;
      review.mutated = true;
      ++run.aggregates.mutations;
    }
    review.algorithm = algorithm;
    out.reviews.push_back(std::move(review));
  }

  detail::finalize(run);
  out.store = std::move(store);
  return out;
}

/// Dispatches on the protocol kind; only the antifragile protocol touches
/// the store.
inline ProtocolRun run_protocol(const ChannelTrace& trace, const ProtocolConfig& config,
                                KnowledgeStore& store) {
  validate(config);
  if (const auto* e = std::get_if<ElasticFixed>(&config)) return run_elastic(trace, e->Y);
  if (const auto* e = std::get_if<EntelechialAdaptive>(&config))
    return run_entelechial(trace, e->predictor, e->epsilon);
  auto result = run_antifragile(trace, std::get<AntifragileEvolving>(config), store);
  store = std::move(result.store);
  return std::move(result.run);
}

// ---------------------------------------------------------------------------
// Fit over a run

/// Fit of each step with supply = Y - y(t).
inline FitOutcome step_fit(const StepRecord& s, FitVariant variant = FitVariant::baseline()) {
  return fit(SupplyValue{static_cast<std::int64_t>(s.Y) - s.y}, variant);
}

inline double mean_fit(std::span<const StepRecord> steps,
                       FitVariant variant = FitVariant::baseline()) {
  if (steps.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : steps) total += step_fit(s, variant).value_or_floor();
  return total / static_cast<double>(steps.size());
}

struct MonotoneCheck {
  std::size_t segments_checked = 0;
  std::size_t epochs_compared = 0;
  std::size_t violations = 0;
};

/// Within every maximal stretch of constant y(t) lasting at least
/// `min_segment` steps, the mean fit of consecutive review epochs lying
/// entirely inside the stretch must not decrease.
inline MonotoneCheck check_monotone_improvement(const ProtocolRun& run, std::size_t epoch_len,
                                                std::size_t min_segment) {
  MonotoneCheck check;
  const auto& steps = run.steps;
  std::size_t begin = 0;
  while (begin < steps.size()) {
    std::size_t end = begin;
    while (end < steps.size() && steps[end].y == steps[begin].y) ++end;
    if (end - begin >= min_segment) {
      ++check.segments_checked;
      std::optional<double> prev;
      const std::size_t first_epoch = (begin + epoch_len - 1) / epoch_len;
      for (std::size_t e = first_epoch; (e + 1) * epoch_len <= end; ++e) {
        const double f = mean_fit(std::span(steps).subspan(e * epoch_len, epoch_len));
        if (prev) {
          ++check.epochs_compared;
          if (f < *prev) ++check.violations;
        }
        prev = f;
      }
    }
    begin = end;
  }
  return check;
}

// ---------------------------------------------------------------------------
// Comparison and output

struct ComparisonRow {
  std::string protocol;
  RunAggregates aggregates;
};

inline std::vector<ComparisonRow> compare_runs(std::span<const ProtocolRun> runs) {
  std::vector<ComparisonRow> rows;
  for (const auto& run : runs) {
    if (!rows.empty()) {
      const auto& ref = runs.front().steps;
      bool same = ref.size() == run.steps.size();
      for (std::size_t i = 0; same && i < ref.size(); ++i) same = ref[i].y == run.steps[i].y;
      if (!same)
        throw Error(Errc::TraceMismatch, "run '" + run.protocol + "' used a different channel trace");
    }
    rows.push_back({run.protocol, run.aggregates});
  }
  return rows;
}

inline void write_comparison_csv(std::ostream& os, std::span<const ComparisonRow> rows) {
  os << "protocol,undershoot_count,cumulative_overshoot,total_cost,delivered_fraction,jitter,"
        "identity_violations\n";
  for (const auto& r : rows) {
    const auto& a = r.aggregates;
    os << r.protocol << ',' << a.undershoot_count << ',' << format_double(a.cumulative_overshoot)
       << ',' << a.total_cost << ',' << format_double(a.delivered_fraction) << ','
       << format_double(a.jitter) << ',' << a.identity_violations << '\n';
  }
}

inline nlohmann::ordered_json to_json(const RunAggregates& a) {
  nlohmann::ordered_json j;
  j["steps"] = a.steps;
  j["undershoot_count"] = a.undershoot_count;
  j["cumulative_overshoot"] = a.cumulative_overshoot;
  j["total_cost"] = a.total_cost;
  j["delivered_fraction"] = a.delivered_fraction;
  j["jitter"] = a.jitter;
  j["identity_violations"] = a.identity_violations;
  j["mutations"] = a.mutations;
  return j;
}

inline void write_run_csv(std::ostream& os, const ProtocolRun& run) {
  os << "t,y,Y,delivered,shoot_kind,shoot_magnitude,cost,algorithm\n";
  for (const auto& s : run.steps) {
    os << s.t << ',' << s.y << ',' << s.Y << ',' << (s.delivered ? 1 : 0) << ','
       << to_string(s.shooting.kind) << ',' << format_double(s.shooting.magnitude) << ','
       << s.cost << ',' << s.algorithm.to_string() << '\n';
  }
}

}  // namespace resil
