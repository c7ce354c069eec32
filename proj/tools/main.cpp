#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "collrabi/commands.hpp"

namespace {

void add_common(CLI::App* sub, collrabi::CommandOptions& opts) {
  sub->add_option("--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--out", opts.out_path, "output file (default: stdout)");
  sub->add_option("--seed", opts.seed, "random seed");
  sub->add_option("--model", opts.model, "eq4, eq5, double or dynamics");
  sub->add_option("--preset", opts.preset, "fig2b, fig2c, fig2d, fig2e, fig4e or fig4f");
  sub->add_option("--plot", opts.plot, "plot output next to --out")
      ->check(CLI::IsMember({"none", "data", "svg"}));
  sub->add_option("--set", opts.assignments, "override a config key (key=value), repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective Rabi oscillation simulator and fitter"};
  app.require_subcommand(1);

  collrabi::CommandOptions opts;
  collrabi::Command command = collrabi::Command::simulate;

  auto* simulate = app.add_subcommand("simulate", "write a noiseless model trace");
  auto* synth = app.add_subcommand("synth", "write a Poisson-sampled trace");
  auto* fit = app.add_subcommand("fit", "fit the broadened model to a trace");
  auto* peaks = app.add_subcommand("peaks", "peak times and their quadratic fit");
  auto* compare = app.add_subcommand("compare", "fit the broadened model to the mechanistic simulation");
  for (auto* sub : {simulate, synth, fit, peaks, compare}) add_common(sub, opts);
  fit->add_option("trace", opts.trace_path, "trace CSV")->required();
  peaks->add_option("trace", opts.trace_path, "trace CSV")->required();

  simulate->callback([&] { command = collrabi::Command::simulate; });
  synth->callback([&] { command = collrabi::Command::synth; });
  fit->callback([&] { command = collrabi::Command::fit; });
  peaks->callback([&] { command = collrabi::Command::peaks; });
  compare->callback([&] { command = collrabi::Command::compare; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return collrabi::run_command(command, opts, std::cout, std::cerr);
}
