// resil: run channel and sentinel experiments, compare behaviors.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "resil/cli.hpp"

int main(int argc, char** argv) {
  using namespace resil;

  CLI::App app{"Behavioral resilience experiments"};
  app.set_version_flag("--version", cli::kToolVersion);
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string fit_variant = "baseline";

  cli::ChannelOptions channel_opt;
  std::string channel_config, channel_out;
  auto* channel = app.add_subcommand("channel", "Simulate protocols over an unreliable channel");
  channel->add_option("-c,--config", channel_config, "Run config JSON")->required();
  channel->add_option("-o,--out", channel_out, "Output directory")->required();
  channel->add_option("--seed", seed, "Override the config seed");
  channel->add_option("--fit-variant", fit_variant, "baseline | quadratic | plateau:W");

  cli::SentinelOptions sentinel_opt;
  std::string sentinel_config, sentinel_out;
  std::optional<std::size_t> curve, runs;
  auto* sentinel = app.add_subcommand("sentinel", "Coal mine / miner / canary scenario");
  sentinel->add_option("-c,--config", sentinel_config, "Scenario config JSON");
  sentinel->add_option("-o,--out", sentinel_out, "Output directory")->required();
  sentinel->add_option("--curve", curve, "Emit the supply/fit table for a pool of N canaries");
  sentinel->add_option("--runs", runs, "Monte Carlo batch size");
  sentinel->add_option("--seed", seed, "Override the config seed");

  cli::CompareOptions compare_opt;
  auto* compare = app.add_subcommand("compare", "Compare two behavior descriptors");
  compare->add_option("a", compare_opt.a, "Descriptor JSON (file or inline)")->required();
  compare->add_option("b", compare_opt.b, "Descriptor JSON (file or inline)")->required();
  compare->add_flag("--organs", compare_opt.organs, "Arguments are cybernetic classes");
  compare->add_option("--fit-variant", fit_variant, "baseline | quadratic | plateau:W");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kExitConfig;
  }

  FitVariant variant;
  try {
    variant = FitVariant::parse(fit_variant);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfig;
  }

  if (*channel) {
    channel_opt.config = channel_config;
    channel_opt.out_dir = channel_out;
    channel_opt.seed = seed;
    channel_opt.fit_variant = variant;
    return cli::cmd_channel(channel_opt, std::cerr);
  }
  if (*sentinel) {
    if (!sentinel_config.empty()) sentinel_opt.config = sentinel_config;
    sentinel_opt.out_dir = sentinel_out;
    sentinel_opt.curve = curve;
    sentinel_opt.runs = runs;
    sentinel_opt.seed = seed;
    return cli::cmd_sentinel(sentinel_opt, std::cerr);
  }
  compare_opt.fit_variant = variant;
  return cli::cmd_compare(compare_opt, std::cout, std::cerr);
}
