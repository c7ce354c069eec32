#include "collrabi/datagen.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "collrabi/errors.hpp"
#include "collrabi/units.hpp"

namespace collrabi {

void validate(const SynthSpec& spec) {
  if (!(spec.t_end > spec.t_start)) throw ConfigError("synth grid needs t_end > t_start");
  if (spec.n_bins < 8) throw ConfigError("synth grid needs at least 8 bins");
  if (!(spec.amplitude >= 0.0)) throw ConfigError("synth amplitude must be >= 0");
  if (!(spec.baseline >= 0.0)) throw ConfigError("synth baseline must be >= 0");
}

std::vector<double> time_grid(double t_start, double t_end, int n_bins) {
  std::vector<double> t(static_cast<std::size_t>(n_bins));
  const double h = (t_end - t_start) / static_cast<double>(n_bins - 1);
  for (int i = 0; i < n_bins; ++i) t[static_cast<std::size_t>(i)] = t_start + h * i;
  return t;
}

std::uint64_t poisson_sample(double lambda, SplitMix64& rng) {
  if (lambda <= 0.0) return 0;
  if (lambda < 30.0) {
    const double u = rng.uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    std::uint64_t k = 0;
    // The tail beyond k = 1000 is far below double resolution for lambda < 30.
    while (u > cdf && k < 1000) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  const double sd = std::sqrt(lambda);
  for (;;) {
    const double u1 = rng.uniform_open_low();
    const double u2 = rng.uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    const double k = std::floor(lambda + sd * z + 0.5);
    if (k >= 0.0) return static_cast<std::uint64_t>(k);
  }
}

TimeTrace expected_trace(const SynthSpec& spec) {
  validate(spec);
  std::vector<double> times = time_grid(spec.t_start, spec.t_end, spec.n_bins);
  std::vector<double> model = evaluate_model(spec.model, times);
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double rate = spec.amplitude * model[i] + spec.baseline;
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw GenerationError("negative or non-finite Poisson rate " + std::to_string(rate) + " at t = " +
                            std::to_string(times[i]) + " us");
    }
    model[i] = rate;
  }
  return make_trace(std::move(times), std::move(model));
}

TimeTrace synth(const SynthSpec& spec, Exec exec) {
  TimeTrace rates = expected_trace(spec);
  std::vector<double> counts(rates.size());
  kernels::for_each_index(rates.size(), exec, [&](std::size_t i) {
    SplitMix64 rng = counter_stream(spec.seed, i);
    counts[i] = static_cast<double>(poisson_sample(rates.counts[i], rng));
  });
  return make_trace(std::move(rates.times), std::move(counts));
}

namespace {

// Local defaults for everything the reference fits leave open.
SynthSpec artifact_defaults() {
  SynthSpec spec;
  spec.model.params = {
      {"beta", 8.0},
      {"C", 6.0},
      {"t0", 0.1},
      {"alpha", units::alpha_from_sigma(units::mhz_to_angular(2.5))},
  };
  spec.provenance = {
      "default: beta = 8 /us, C = 6 /us, t0 = 0.1 us (not given)",
      "default: sigma_Delta = 2pi x 2.5 MHz, half the EIT window (alpha not given)",
      "default: amplitude = 100 counts, baseline = 2 counts, 2 ns bins over 0-0.3 us",
  };
  return spec;
}

SynthSpec single_preset(double omega_n_mhz) {
  SynthSpec spec = artifact_defaults();
  spec.model.name = ModelName::eq5;
  spec.model.params["omega_n"] = units::mhz_to_angular(omega_n_mhz);
  const double delta_c = 23.4;
  spec.context = {{"delta_c_mhz", delta_c},
                  {"delta_p_mhz", -2.7},
                  {"omega_c_mhz", std::sqrt(omega_n_mhz * omega_n_mhz - delta_c * delta_c)}};
  std::ostringstream note;
  note << "given: omega_n = 2pi x " << omega_n_mhz
       << " MHz, read detuning delta_c = 2pi x 23.4 MHz; omega_c derived as sqrt(omega_n^2 - delta_c^2)";
  spec.provenance.insert(spec.provenance.begin(), note.str());
  return spec;
}

SynthSpec double_preset(double low_mhz, double high_mhz, double delta_c) {
  SynthSpec spec = artifact_defaults();
  spec.model.name = ModelName::two_component;
  spec.model.params["omega_n1"] = units::mhz_to_angular(low_mhz);
  spec.model.params["omega_n2"] = units::mhz_to_angular(high_mhz);
  spec.model.params["a1"] = 0.5;
  spec.model.params["a2"] = 0.5;
  spec.context = {{"delta_c_mhz", delta_c}, {"omega_c_mhz", 44.8}};
  spec.provenance.insert(spec.provenance.begin(), "given: omega_n pair and delta_c, omega_c = 2pi x 44.8 MHz");
  spec.provenance.push_back("default: equal component weights a1 = a2 = 0.5");
  return spec;
}

}  // namespace

SynthSpec preset(std::string_view name) {
  if (name == "fig2b") return single_preset(46.1);
  if (name == "fig2c") return single_preset(47.7);
  if (name == "fig2d") return single_preset(49.3);
  if (name == "fig2e") return single_preset(50.9);
  if (name == "fig4e") return double_preset(41.4, 62.1, 35.0);
  if (name == "fig4f") return double_preset(49.3, 68.4, 44.0);
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace collrabi
