#include "collrabi/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "collrabi/analysis.hpp"
#include "collrabi/core_model.hpp"
#include "collrabi/datagen.hpp"
#include "collrabi/dynamics.hpp"
#include "collrabi/errors.hpp"
#include "collrabi/fitting.hpp"
#include "collrabi/report.hpp"
#include "collrabi/trace_io.hpp"
#include "collrabi/units.hpp"

namespace collrabi {

namespace {

using units::angular_to_mhz;
using units::mhz_to_angular;

Config default_config() {
  Config base = preset_config("fig2e");
  Config cfg;
  for (const auto& [key, value] : base.entries()) {
    if (!key.starts_with("drive.")) cfg.set(key, value);
  }
  cfg.set("synth.seed", "1");
  cfg.set("fit.seed", "1");
  cfg.set("fit.n_starts", "1");
  cfg.set("plot.mode", "none");
  return cfg;
}

double alpha_from_mhz(double sigma_mhz) {
  if (!(sigma_mhz > 0.0)) throw ConfigError("sigma_delta_mhz must be > 0");
  return units::alpha_from_sigma(mhz_to_angular(sigma_mhz));
}

ParameterMap dynamics_params(const Config& cfg) {
  const DynamicsConfig d = default_dynamics_config();
  ParameterMap p;
  p["n_m"] = cfg.get_double("dynamics.n_m", d.s0.n_m);
  p["n_m_prime"] = cfg.get_double("dynamics.n_m_prime", p["n_m"]);
  p["eta"] = cfg.get_double("dynamics.eta", d.s0.eta);
  p["omega"] = mhz_to_angular(cfg.get_double("dynamics.omega_mhz", angular_to_mhz(d.s0.omega)));
  p["omega_g"] = mhz_to_angular(cfg.get_double("dynamics.omega_g_mhz", angular_to_mhz(d.s0.omega_g)));
  p["gamma_loss"] = cfg.get_double("dynamics.gamma_loss", d.gamma_loss);
  p["gamma_conv"] = cfg.get_double("dynamics.gamma_conv", d.gamma_conv);
  p["gamma_e"] = mhz_to_angular(cfg.get_double("dynamics.gamma_e_mhz", angular_to_mhz(d.gamma_e)));
  p["delta"] = mhz_to_angular(cfg.get_double("dynamics.delta_mhz", 0.0));
  p["dt"] = cfg.get_double("dynamics.dt", d.dt);
  p["t_end"] = cfg.get_double("dynamics.t_end", d.t_end);
  if (cfg.has("dynamics.sigma_delta_mhz")) {
    p["alpha"] = alpha_from_mhz(cfg.get_double("dynamics.sigma_delta_mhz", 0.0));
  }
  return p;
}

std::vector<double> grid_from(const Config& cfg) {
  const double t0 = cfg.get_double("grid.t_start", 0.0);
  const double t1 = cfg.get_double("grid.t_end", 0.3);
  const int n = cfg.get_int("grid.n_bins", 151);
  if (!(t1 > t0)) throw ConfigError("grid.t_end must exceed grid.t_start");
  if (n < 2) throw ConfigError("grid.n_bins must be >= 2");
  return time_grid(t0, t1, n);
}

PlotMode plot_mode(const CommandOptions& opts, const Config& cfg) {
  return parse_plot_mode(opts.plot.empty() ? cfg.get_string("plot.mode", "none") : opts.plot);
}

// Writes the primary output to --out or the stream.
void emit(const CommandOptions& opts, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (opts.out_path.empty()) {
    body(out);
    return;
  }
  std::ofstream file(opts.out_path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + opts.out_path + "'");
  body(file);
  if (!file) throw ConfigError("write failed for '" + opts.out_path + "'");
}

void emit_plot(const CommandOptions& opts, PlotMode mode, std::span<const double> times,
               std::span<const double> values, const std::string& title, std::ostream& err) {
  if (mode == PlotMode::none) return;
  if (opts.out_path.empty()) throw ConfigError("--plot needs --out to place the plot file");
  const std::string path = opts.out_path + (mode == PlotMode::data ? ".plot.dat" : ".svg");
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  if (mode == PlotMode::data) {
    write_plot_data(file, times, values);
  } else {
    write_plot_svg(file, times, values, title);
  }
  err << "plot written to " << path << '\n';
}

int run_simulate(const CommandOptions& opts, const Config& cfg, std::ostream& out, std::ostream& err) {
  const ModelSpec model = model_from_config(cfg);
  std::vector<double> times = grid_from(cfg);
  std::vector<double> signal = evaluate_model(model, times);
  for (double s : signal) {
    if (!std::isfinite(s)) throw NumericalError("model produced a non-finite value");
  }
  TimeTrace trace = make_trace(times, signal);
  emit(opts, out, [&](std::ostream& os) { write_trace_csv(os, trace); });
  emit_plot(opts, plot_mode(opts, cfg), times, signal, "model " + std::string(to_string(model.name)), err);
  return 0;
}

int run_synth(const CommandOptions& opts, const Config& cfg, std::ostream& out, std::ostream& err) {
  SynthSpec spec;
  spec.model = model_from_config(cfg);
  spec.t_start = cfg.get_double("grid.t_start", spec.t_start);
  spec.t_end = cfg.get_double("grid.t_end", spec.t_end);
  spec.n_bins = cfg.get_int("grid.n_bins", spec.n_bins);
  spec.amplitude = cfg.get_double("synth.amplitude", spec.amplitude);
  spec.baseline = cfg.get_double("synth.baseline", spec.baseline);
  spec.seed = cfg.get_u64("synth.seed", spec.seed);
  if (!opts.preset.empty()) {
    for (const auto& line : preset(opts.preset).provenance) err << "provenance: " << line << '\n';
  }
  const TimeTrace trace = synth(spec);
  emit(opts, out, [&](std::ostream& os) { write_trace_csv(os, trace); });
  emit_plot(opts, plot_mode(opts, cfg), trace.times, trace.counts, "synthetic counts", err);
  return 0;
}

int run_fit(const CommandOptions& opts, const Config& cfg, std::ostream& out, std::ostream& err) {
  if (opts.trace_path.empty()) throw ConfigError("fit needs a trace file");
  const TimeTrace trace = read_trace_file(opts.trace_path);
  const FitModelSpec spec = fit_spec_from(cfg);
  const int n_starts = cfg.get_int("fit.n_starts", 1);
  const FitResult result = multi_start_fit(trace, spec, n_starts, cfg.get_u64("fit.seed", 1));
  emit(opts, out, [&](std::ostream& os) { write_fit_report(os, result); });
  const std::vector<double> curve = evaluate_fit_model(result.kind, result.estimates, trace.times, spec.n_nodes);
  emit_plot(opts, plot_mode(opts, cfg), trace.times, curve, "fitted model", err);
  if (!result.converged) {
    err << "fit did not converge after " << result.n_iter << " iterations\n";
    return 3;
  }
  return 0;
}

int run_peaks(const CommandOptions& opts, const Config& cfg, std::ostream& out, std::ostream& err) {
  if (opts.trace_path.empty()) throw ConfigError("peaks needs a trace file");
  const TimeTrace trace = read_trace_file(opts.trace_path);
  const auto [lo, hi] = std::minmax_element(trace.counts.begin(), trace.counts.end());
  if (!(*hi > *lo)) throw AnalysisError("flat trace has no peaks");
  const int hw = cfg.get_int("peaks.smooth_halfwidth", kCountsSmoothing);
  const double min_prom = cfg.get_double("peaks.min_prominence", 0.05 * (*hi - *lo));
  const PeakSet peaks = find_peaks(trace, hw, min_prom);
  if (peaks.size() < 3) {
    throw AnalysisError("found " + std::to_string(peaks.size()) + " peaks; the quadratic needs 3");
  }
  const QuadraticPeakFit quad = quadratic_peak_fit(peaks);
  const std::vector<double> spacings = peak_spacings(peaks);
  emit(opts, out, [&](std::ostream& os) { write_peaks_report(os, peaks, quad, spacings); });
  std::vector<double> order(peaks.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<double>(k + 1);
  emit_plot(opts, plot_mode(opts, cfg), order, peaks.times, "peak time vs order", err);
  return 0;
}

int run_compare(const CommandOptions& opts, const Config& cfg, std::ostream& out, std::ostream& err) {
  const ParameterMap params = dynamics_params(cfg);
  const DynamicsConfig dyn = dynamics_config_from(params);
  validate(dyn);
  StateTrajectory traj;
  if (const auto it = params.find("alpha"); it != params.end()) {
    traj = ensemble_average(dyn, BroadeningParams{it->second, kDefaultHermiteNodes});
  } else {
    traj = evolve(dyn);
  }

  // The fit sees the trajectory on the configured bin width; the peak
  // comparison uses every integration step.
  const std::vector<double> grid = grid_from(cfg);
  const double h = grid[1] - grid[0];
  const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(h / dyn.dt)));
  const TimeTrace full = traj.intensity_trace();
  std::vector<double> t, y;
  for (std::size_t i = 0; i < full.size(); i += stride) {
    t.push_back(full.times[i]);
    y.push_back(full.counts[i]);
  }
  const TimeTrace binned = make_trace(std::move(t), std::move(y));

  FitModelSpec spec;
  spec.kind = FitKind::single;
  spec.n_nodes = cfg.get_int("fit.n_nodes", kDefaultHermiteNodes);
  spec.max_iter = cfg.get_int("fit.max_iter", 500);
  // Noiseless trajectory: uniform weights.
  spec.weighting = Weighting::data;
  spec.fixed["alpha"] = cfg.has("dynamics.sigma_delta_mhz") ? params.at("alpha") : 1e6;
  spec.bounds["t0"] = ParameterBounds{binned.times.front(), binned.times.back()};
  const FitResult result = multi_start_fit(binned, spec, cfg.get_int("fit.n_starts", 1), cfg.get_u64("fit.seed", 1));

  std::ostringstream report;
  write_fit_report(report, result);
  if (!result.converged) {
    emit(opts, out, [&](std::ostream& os) { os << report.str(); });
    throw AnalysisError("fit to the simulated intensity did not converge");
  }
  const ModelComparison cmp = compare_to_model(traj, result, spec.n_nodes);
  write_compare_report(report, cmp);
  emit(opts, out, [&](std::ostream& os) { os << report.str(); });
  emit_plot(opts, plot_mode(opts, cfg), binned.times, binned.counts, "mechanistic intensity", err);
  return 0;
}

}  // namespace

FitModelSpec fit_spec_from(const Config& cfg) {
  FitModelSpec spec;
  const std::string default_kind = cfg.get_string("model.name", "eq5") == "double" ? "double" : "single";
  const std::string kind = cfg.get_string("fit.kind", default_kind);
  if (kind == "single") {
    spec.kind = FitKind::single;
  } else if (kind == "double") {
    spec.kind = FitKind::two_component;
  } else {
    throw ConfigError("fit.kind must be 'single' or 'double', got '" + kind + "'");
  }
  spec.n_nodes = cfg.get_int("fit.n_nodes", kDefaultHermiteNodes);
  spec.max_iter = cfg.get_int("fit.max_iter", 500);
  const std::string weighting = cfg.get_string("fit.weighting", "model");
  if (weighting == "model") {
    spec.weighting = Weighting::model;
  } else if (weighting == "data") {
    spec.weighting = Weighting::data;
  } else {
    throw ConfigError("fit.weighting must be 'model' or 'data', got '" + weighting + "'");
  }
  if (!cfg.get_bool("fit.free_alpha", false)) {
    spec.fixed["alpha"] = alpha_from_mhz(cfg.get_double("model.sigma_delta_mhz", 2.5));
  }
  const auto& names = parameter_names(spec.kind);
  for (const auto& [key, value] : cfg.entries()) {
    if (!key.starts_with("fit.fix.")) continue;
    const std::string name = key.substr(8);
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("'" + key + "' does not name a parameter of the " + kind + " model");
    }
    const double v = parse_double(value, key);
    spec.fixed[name] = name.starts_with("omega_n") ? mhz_to_angular(v) : v;
  }
  validate(spec);
  return spec;
}

PlotMode parse_plot_mode(const std::string& text) {
  if (text == "none") return PlotMode::none;
  if (text == "data") return PlotMode::data;
  if (text == "svg") return PlotMode::svg;
  throw ConfigError("plot mode must be none, data or svg, got '" + text + "'");
}

Config resolve_config(Command command, const CommandOptions& opts) {
  Config upper;
  if (!opts.preset.empty()) upper.merge(preset_config(opts.preset));
  if (!opts.config_path.empty()) upper.merge(Config::load(opts.config_path));
  if (!opts.model.empty()) {
    parse_model_name(opts.model);
    upper.set("model.name", opts.model);
  }
  if (opts.seed) {
    upper.set(command == Command::synth ? "synth.seed" : "fit.seed", std::to_string(*opts.seed));
  }
  if (!opts.plot.empty()) upper.set("plot.mode", opts.plot);
  for (const auto& assignment : opts.assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    upper.set(assignment.substr(0, eq), assignment.substr(eq + 1));
  }

  if (!upper.has("model.omega_n_mhz") && (upper.has("drive.omega_c_mhz") || upper.has("drive.delta_c_mhz"))) {
    DriveParams drive;
    drive.omega_c = mhz_to_angular(upper.get_double("drive.omega_c_mhz", 0.0));
    drive.delta_c = mhz_to_angular(upper.get_double("drive.delta_c_mhz", 0.0));
    drive.delta_p = mhz_to_angular(upper.get_double("drive.delta_p_mhz", 0.0));
    validate(drive);
    upper.set("model.omega_n_mhz", format_double(angular_to_mhz(effective_rabi(drive))));
  }

  Config cfg = default_config();
  cfg.merge(upper);
  return cfg;
}

ModelSpec model_from_config(const Config& cfg) {
  ModelSpec spec;
  spec.name = parse_model_name(cfg.get_string("model.name", "eq5"));
  ParameterMap& p = spec.params;
  auto copy = [&](const char* key, const char* name) {
    if (cfg.has(key)) p[name] = cfg.get_double(key, 0.0);
  };
  auto copy_mhz = [&](const char* key, const char* name) {
    if (cfg.has(key)) p[name] = mhz_to_angular(cfg.get_double(key, 0.0));
  };
  switch (spec.name) {
    case ModelName::dynamics:
      p = dynamics_params(cfg);
      return spec;
    case ModelName::eq4:
      copy_mhz("model.omega_n_mhz", "omega_n");
      p["delta"] = mhz_to_angular(cfg.get_double("model.delta_mhz", 0.0));
      break;
    case ModelName::eq5:
      copy_mhz("model.omega_n_mhz", "omega_n");
      break;
    case ModelName::two_component:
      copy_mhz("model.omega_n1_mhz", "omega_n1");
      copy_mhz("model.omega_n2_mhz", "omega_n2");
      copy("model.a1", "a1");
      copy("model.a2", "a2");
      break;
  }
  copy("model.beta", "beta");
  copy("model.chirp", "C");
  copy("model.t0", "t0");
  if (spec.name != ModelName::eq4) {
    p["alpha"] = alpha_from_mhz(cfg.get_double("model.sigma_delta_mhz", 2.5));
    copy("model.n_nodes", "n_nodes");
  }
  return spec;
}

int run_command(Command command, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const Config cfg = resolve_config(command, opts);
    switch (command) {
      case Command::simulate:
        return run_simulate(opts, cfg, out, err);
      case Command::synth:
        return run_synth(opts, cfg, out, err);
      case Command::fit:
        return run_fit(opts, cfg, out, err);
      case Command::peaks:
        return run_peaks(opts, cfg, out, err);
      case Command::compare:
        return run_compare(opts, cfg, out, err);
    }
  } catch (const MultiStartError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& line : e.diagnostics()) err << "  " << line << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 4;
  }
  return 4;
}

}  // namespace collrabi
