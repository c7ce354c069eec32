#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "collrabi/config.hpp"
#include "collrabi/fitting.hpp"
#include "collrabi/models.hpp"

namespace collrabi {

enum class Command { simulate, synth, fit, peaks, compare };

enum class PlotMode { none, data, svg };
PlotMode parse_plot_mode(const std::string& text);

struct CommandOptions {
  std::string config_path;
  std::string out_path;  // empty writes the primary output to the given stream
  std::optional<std::uint64_t> seed;
  std::string model;
  std::string preset;
  std::string plot;                 // empty defers to plot.mode
  std::vector<std::string> assignments;  // key=value, applied last
  std::string trace_path;           // fit and peaks
};

// Layers, lowest first: built-in defaults, --preset, --config, then flags.
// --seed sets synth.seed or fit.seed depending on the command. When drive
// keys are given above the default layer without model.omega_n_mhz, the
// effective Rabi frequency is derived from them.
Config resolve_config(Command command, const CommandOptions& opts);

// Forward model selected by the config; frequencies are read in MHz.
ModelSpec model_from_config(const Config& cfg);

// Fit setup from fit.* keys; alpha is held at model.sigma_delta_mhz unless
// fit.free_alpha is set.
FitModelSpec fit_spec_from(const Config& cfg);

// Runs one command. The primary output (trace CSV or report) goes to
// opts.out_path or to `out`; plot files are written next to --out as
// <out>.plot.dat or <out>.svg. Diagnostics go to `err`. Returns the exit
// code: 0 success, 2 input/config, 3 analysis, 4 numerical.
int run_command(Command command, const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace collrabi
