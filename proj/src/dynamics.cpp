#include "collrabi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "collrabi/errors.hpp"
#include "collrabi/quadrature.hpp"
#include "collrabi/units.hpp"

namespace collrabi {

using cplx = std::complex<double>;

DynamicsConfig default_dynamics_config() {
  DynamicsConfig cfg;
  cfg.s0 = {1000.0, 1000.0, 0.0, 0.0, units::mhz_to_angular(50.9)};
  cfg.gamma_loss = 1.0;
  cfg.gamma_conv = 2.0;
  cfg.gamma_e = units::mhz_to_angular(6.07);
  cfg.delta = 0.0;
  cfg.dt = 2.5e-5;
  cfg.t_end = 0.3;
  return cfg;
}

void validate(const DynamicsConfig& cfg) {
  validate(cfg.s0);
  if (!(cfg.gamma_loss >= 0.0) || !(cfg.gamma_conv >= 0.0) || !(cfg.gamma_e >= 0.0)) {
    throw ConfigError("dynamics rates gamma_loss, gamma_conv, gamma_e must be >= 0");
  }
  if (!std::isfinite(cfg.delta)) throw ConfigError("dynamics detuning must be finite");
  if (!(cfg.dt > 0.0)) throw ConfigError("dynamics step dt must be > 0");
  if (!(cfg.t_end > cfg.dt)) throw ConfigError("dynamics horizon t_end must exceed dt");
  if (cfg.record_stride < 1) throw ConfigError("dynamics record_stride must be >= 1");
  const double omega_max = collective_rabi(cfg.s0).detected;
  if (omega_max > 0.0) {
    const double limit = units::kTwoPi / omega_max / 20.0;
    if (cfg.dt > limit) {
      std::ostringstream msg;
      msg << "dynamics step dt = " << cfg.dt << " us exceeds 1/20 of the Rabi period (" << limit << " us)";
      throw ConfigError(msg.str());
    }
  }
}

TimeTrace StateTrajectory::intensity_trace() const { return make_trace(times, intensity); }

CollectiveSizeParams size_at(const DynamicsConfig& cfg, double t) {
  CollectiveSizeParams s = cfg.s0;
  s.n_m_prime = cfg.s0.n_m_prime * std::exp(-cfg.gamma_loss * t);
  s.eta = 1.0 - (1.0 - cfg.s0.eta) * std::exp(-cfg.gamma_conv * t);
  return s;
}

double collective_coupling(const DynamicsConfig& cfg, double t) { return collective_rabi(size_at(cfg, t)).detected; }

double emission_intensity(const DynamicsConfig& cfg, cplx amp_e) {
  const double population = std::norm(amp_e);
  return cfg.gamma_e > 0.0 ? cfg.gamma_e * population : population;
}

namespace {

struct Amplitudes {
  cplx e;
  cplx r;
};

Amplitudes derivative(const DynamicsConfig& cfg, double t, const Amplitudes& a) {
  constexpr cplx i{0.0, 1.0};
  const double half_omega = 0.5 * collective_coupling(cfg, t);
  const double damping = 0.5 * (cfg.gamma_e + cfg.gamma_conv);
  return {-damping * a.e + i * half_omega * a.r, i * cfg.delta * a.r + i * half_omega * a.e};
}

Amplitudes axpy(const Amplitudes& a, double h, const Amplitudes& k) { return {a.e + h * k.e, a.r + h * k.r}; }

void record(StateTrajectory& traj, const DynamicsConfig& cfg, double t, const Amplitudes& a) {
  traj.times.push_back(t);
  traj.amp_e.push_back(a.e);
  traj.amp_r.push_back(a.r);
  const CollectiveSizeParams s = size_at(cfg, t);
  traj.omega_coll.push_back(collective_rabi(s).detected);
  traj.n_prime.push_back(s.n_m_prime);
  traj.intensity.push_back(emission_intensity(cfg, a.e));
}

}  // namespace

StateTrajectory evolve(const DynamicsConfig& cfg) {
  validate(cfg);
  const auto n_steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
  StateTrajectory traj;
  const auto n_records = static_cast<std::size_t>(n_steps / cfg.record_stride + 1);
  traj.times.reserve(n_records);
  traj.amp_e.reserve(n_records);
  traj.amp_r.reserve(n_records);
  traj.omega_coll.reserve(n_records);
  traj.n_prime.reserve(n_records);
  traj.intensity.reserve(n_records);

  Amplitudes a{0.0, 1.0};
  const double h = cfg.dt;
  record(traj, cfg, 0.0, a);
  for (long step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * h;
    const Amplitudes k1 = derivative(cfg, t, a);
    const Amplitudes k2 = derivative(cfg, t + 0.5 * h, axpy(a, 0.5 * h, k1));
    const Amplitudes k3 = derivative(cfg, t + 0.5 * h, axpy(a, 0.5 * h, k2));
    const Amplitudes k4 = derivative(cfg, t + h, axpy(a, h, k3));
    a.e += h / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
    a.r += h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
    if (!std::isfinite(a.e.real()) || !std::isfinite(a.e.imag()) || !std::isfinite(a.r.real()) ||
        !std::isfinite(a.r.imag())) {
      throw NumericalError("dynamics produced a non-finite amplitude at t = " + std::to_string(t + h) + " us");
    }
    if ((step + 1) % cfg.record_stride == 0) record(traj, cfg, static_cast<double>(step + 1) * h, a);
  }
  return traj;
}

StateTrajectory ensemble_average(const DynamicsConfig& cfg, const BroadeningParams& b, Exec exec) {
  validate(cfg);
  validate(b);
  const QuadratureRule& rule = hermite_rule(b.n_nodes);
  const double scale = 1.0 / std::sqrt(b.alpha);
  const double norm = 1.0 / std::sqrt(std::numbers::pi);

  std::vector<StateTrajectory> members(rule.size());
  kernels::for_each_index(rule.size(), exec, [&](std::size_t i) {
    DynamicsConfig shifted = cfg;
    shifted.delta = cfg.delta + rule.nodes[i] * scale;
    members[i] = evolve(shifted);
  });

  StateTrajectory avg = members.front();
  const std::size_t n = avg.size();
  std::vector<double> pop_e(n, 0.0);
  std::vector<double> pop_r(n, 0.0);
  std::fill(avg.intensity.begin(), avg.intensity.end(), 0.0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double w = rule.weights[i] * norm;
    const StateTrajectory& m = members[i];
    for (std::size_t k = 0; k < n; ++k) {
      avg.intensity[k] += w * m.intensity[k];
      pop_e[k] += w * std::norm(m.amp_e[k]);
      pop_r[k] += w * std::norm(m.amp_r[k]);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    avg.amp_e[k] = std::sqrt(pop_e[k]);
    avg.amp_r[k] = std::sqrt(pop_r[k]);
  }
  return avg;
}

ModelComparison compare_to_model(const StateTrajectory& traj, const FitResult& fit, int n_nodes) {
  if (traj.size() < 3) throw AnalysisError("cannot compare an empty trajectory");
  if (!fit.converged) throw AnalysisError("cannot compare against an unconverged fit");

  const TimeTrace measured = traj.intensity_trace();
  TimeTrace model = make_trace(traj.times, evaluate_fit_model(fit.kind, fit.estimates, traj.times, n_nodes));

  auto peak_times = [](const TimeTrace& trace, const char* which) {
    const double top = *std::max_element(trace.counts.begin(), trace.counts.end());
    const PeakSet peaks = find_peaks(trace, 0, 1e-9 * std::max(top, 1e-300));
    if (peaks.size() < 3) {
      throw AnalysisError(std::string(which) + " has fewer than 3 peaks; nothing to compare");
    }
    return refined_peak_times(trace, peaks);
  };

  ModelComparison out;
  out.trajectory_peaks = peak_times(measured, "trajectory");
  out.model_peaks = peak_times(model, "fitted model");
  out.trajectory_quadratic = quadratic_fit(out.trajectory_peaks);
  out.model_quadratic = quadratic_fit(out.model_peaks);
  auto frequency = [](const std::vector<double>& t) {
    return units::kTwoPi * static_cast<double>(t.size() - 1) / (t.back() - t.front());
  };
  out.trajectory_frequency = frequency(out.trajectory_peaks);
  out.model_frequency = frequency(out.model_peaks);
  out.relative_discrepancy = (out.model_frequency - out.trajectory_frequency) / out.trajectory_frequency;
  return out;
}

DynamicsConfig dynamics_config_from(const ParameterMap& params) {
  DynamicsConfig cfg = default_dynamics_config();
  cfg.s0.n_m = param_or(params, "n_m", cfg.s0.n_m);
  cfg.s0.n_m_prime = param_or(params, "n_m_prime", cfg.s0.n_m);
  cfg.s0.eta = param_or(params, "eta", cfg.s0.eta);
  cfg.s0.omega_g = param_or(params, "omega_g", cfg.s0.omega_g);
  cfg.s0.omega = param_or(params, "omega", cfg.s0.omega);
  cfg.gamma_loss = param_or(params, "gamma_loss", cfg.gamma_loss);
  cfg.gamma_conv = param_or(params, "gamma_conv", cfg.gamma_conv);
  cfg.gamma_e = param_or(params, "gamma_e", cfg.gamma_e);
  cfg.delta = param_or(params, "delta", cfg.delta);
  cfg.dt = param_or(params, "dt", cfg.dt);
  cfg.t_end = param_or(params, "t_end", cfg.t_end);
  return cfg;
}

}  // namespace collrabi
