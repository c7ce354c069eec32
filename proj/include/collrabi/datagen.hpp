#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "collrabi/analysis.hpp"
#include "collrabi/kernels.hpp"
#include "collrabi/models.hpp"
#include "collrabi/rng.hpp"

namespace collrabi {

struct SynthSpec {
  ModelSpec model;
  double t_start = 0.0;  // us
  double t_end = 0.3;    // us
  int n_bins = 151;
  double amplitude = 100.0;  // counts per unit of model signal
  double baseline = 2.0;     // counts
  std::uint64_t seed = 1;
  // Experimental context of a preset in cyclic MHz (omega_c_mhz, delta_c_mhz, ...).
  std::map<std::string, double> context;
  // Which values are given by the reference fits and which are local defaults.
  std::vector<std::string> provenance;
};

void validate(const SynthSpec& spec);

// n_bins points from t_start to t_end inclusive; each point is the center
// of a bin of width (t_end - t_start) / (n_bins - 1).
std::vector<double> time_grid(double t_start, double t_end, int n_bins);

// Poisson variate: inverse transform below lambda = 30, rounded normal
// approximation (Box-Muller, redrawn while negative) at and above it.
std::uint64_t poisson_sample(double lambda, SplitMix64& rng);

// Rates lambda_i = amplitude * model(t_i) + baseline; bin i draws from
// counter_stream(seed, i), so the result does not depend on Exec.
// Throws GenerationError for negative or non-finite rates.
TimeTrace synth(const SynthSpec& spec, Exec exec = Exec::parallel);

// Noiseless rates on the same grid.
TimeTrace expected_trace(const SynthSpec& spec);

inline constexpr std::string_view kPresetNames[] = {"fig2b", "fig2c", "fig2d", "fig2e", "fig4e", "fig4f"};

// Throws ConfigError for unknown names.
SynthSpec preset(std::string_view name);

}  // namespace collrabi
