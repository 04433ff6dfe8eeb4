// gridshare command-line front end.
#include <CLI11.hpp>
#include <iostream>
#include <iterator>
#include <utility>

#include "gridshare/pipeline.hpp"

int main(int argc, char** argv) {
  namespace pl = gridshare::pipeline;
  CLI::App app{"Curtailment rules and line-investment equilibria for shared grid connections"};
  app.require_subcommand(1, 1);

  pl::Invocation inv;
  std::string config, out;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> subcommands[] = {
      {"synth-wind", "Sample leader and follower wind series"},
      {"ingest", "Clean mast and demand CSVs, build the demand profile"},
      {"fit", "Weibull, Beta and joint-histogram fits per hour and season"},
      {"simulate", "Curtailment rules over a fleet and a range of correlations"},
      {"equilibrium", "Leader/follower capacity equilibrium for one cost setting"},
      {"sweep", "Equilibria across one swept cost parameter"},
  };
  static_assert(std::size(subcommands) == std::size(pl::kSubcommands));
  for (const auto& [name, help] : subcommands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override run.seed");
    sub->add_option("--out,-o", out, "Override run.out_dir");
    sub->add_option("--set", inv.overrides, "Override section.key=value (repeatable)")
        ->take_all()
        ->allow_extra_args(false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pl::kConfig;
  }

  auto* sub = app.get_subcommands().front();
  inv.subcommand = sub->get_name();
  if (!config.empty()) inv.config = config;
  if (sub->count("--seed") > 0) inv.seed = seed;
  if (!out.empty()) inv.out = out;
  return pl::run(inv, std::cout, std::cerr);
}
