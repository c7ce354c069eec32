#pragma once

#include <complex>
#include <vector>

#include "collrabi/analysis.hpp"
#include "collrabi/broadening.hpp"
#include "collrabi/core_model.hpp"
#include "collrabi/fitting.hpp"
#include "collrabi/kernels.hpp"
#include "collrabi/models.hpp"

namespace collrabi {

// Mechanistic read-out model: a driven two-level system |E_m> <-> |R_m>
// whose coupling shrinks as atoms are lost (rate gamma_loss) and |E_m> is
// converted to the many-atom ground state (rate gamma_conv).
struct DynamicsConfig {
  CollectiveSizeParams s0;
  double gamma_loss = 0.0;  // 1/us
  double gamma_conv = 0.0;  // 1/us
  double gamma_e = 0.0;     // 1/us, radiative decay of |E_m>
  double delta = 0.0;       // rad/us
  double dt = 2.5e-5;       // us
  double t_end = 0.3;       // us
  int record_stride = 1;    // keep every n-th step
};

// Defaults used by the CLI and presets. gamma_e = 2pi x 6.07 MHz is the Rb 5P
// natural linewidth from the general literature.
DynamicsConfig default_dynamics_config();

// Throws ConfigError on invalid rates, horizon, or a step that resolves the
// initial collective Rabi period with fewer than 20 steps.
void validate(const DynamicsConfig& cfg);

struct StateTrajectory {
  std::vector<double> times;
  std::vector<std::complex<double>> amp_e;
  std::vector<std::complex<double>> amp_r;
  std::vector<double> omega_coll;
  std::vector<double> n_prime;
  std::vector<double> intensity;

  std::size_t size() const { return times.size(); }
  TimeTrace intensity_trace() const;
};

// Atom number, conversion and detected collective coupling at time t:
// N'(t) = N'_0 exp(-gamma_loss t), 1 - eta(t) = (1 - eta_0) exp(-gamma_conv t).
CollectiveSizeParams size_at(const DynamicsConfig& cfg, double t);
double collective_coupling(const DynamicsConfig& cfg, double t);

// Emission proxy gamma_e |amp_e|^2; with gamma_e = 0 the unit-rate |amp_e|^2.
double emission_intensity(const DynamicsConfig& cfg, std::complex<double> amp_e);

// Classical RK4 on d(amp_e)/dt = -(gamma_e + gamma_conv)/2 amp_e + i Omega/2 amp_r,
// d(amp_r)/dt = i Delta amp_r + i Omega/2 amp_e, starting from amp_r = 1.
StateTrajectory evolve(const DynamicsConfig& cfg);

// Intensity averaged over shifts cfg.delta + x_i / sqrt(alpha) with the unit-
// normalized Hermite weights. Amplitude columns hold the root mean
// populations. Nodes run in parallel; the sum is taken in node order.
StateTrajectory ensemble_average(const DynamicsConfig& cfg, const BroadeningParams& b,
                                 Exec exec = Exec::parallel);

struct ModelComparison {
  std::vector<double> trajectory_peaks;  // us
  std::vector<double> model_peaks;       // us
  QuadraticPeakFit trajectory_quadratic;
  QuadraticPeakFit model_quadratic;
  double trajectory_frequency = 0.0;  // rad/us, from the mean peak spacing
  double model_frequency = 0.0;
  double relative_discrepancy = 0.0;  // (model - trajectory) / trajectory
};

// Peak-time series of the trajectory intensity and of the fitted
// single-component model on the same grid. Throws AnalysisError for an
// empty trajectory, an unconverged fit, or fewer than 3 peaks in either.
ModelComparison compare_to_model(const StateTrajectory& traj, const FitResult& fit,
                                 int n_nodes = kDefaultHermiteNodes);

// Builds a config from model-parameter keys: n_m, n_m_prime, eta, omega_g,
// omega, gamma_loss, gamma_conv, gamma_e, delta, dt, t_end; missing keys take
// default_dynamics_config() values.
DynamicsConfig dynamics_config_from(const ParameterMap& params);

}  // namespace collrabi
