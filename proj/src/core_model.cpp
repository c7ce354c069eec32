#include "collrabi/core_model.hpp"

#include <cmath>
#include <string>

#include "collrabi/errors.hpp"
#include "collrabi/units.hpp"

namespace collrabi {

namespace units {
double sigma_from_alpha(double alpha) { return 1.0 / std::sqrt(2.0 * alpha); }
}  // namespace units

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void validate(const DriveParams& drive) {
  require(std::isfinite(drive.omega_c) && std::isfinite(drive.delta_c) &&
              std::isfinite(drive.delta_p),
          "drive parameters must be finite");
  require(drive.omega_c >= 0.0, "coupling Rabi frequency must be >= 0");
}

void validate(const ChirpedOscParams& p) {
  require(std::isfinite(p.beta) && std::isfinite(p.chirp) && std::isfinite(p.t0) &&
              std::isfinite(p.omega_n) && std::isfinite(p.delta),
          "oscillation parameters must be finite");
  require(p.beta >= 0.0, "beta must be >= 0");
  require(p.chirp >= 0.0, "chirp coefficient must be >= 0");
  require(p.omega_n >= 0.0, "omega_n must be >= 0");
}

void validate(const CollectiveSizeParams& s) {
  require(s.n_m > 0.0, "atom number n_m must be > 0");
  require(s.n_m_prime >= 0.0 && s.n_m_prime <= s.n_m, "n_m_prime must lie in [0, n_m]");
  require(s.eta >= 0.0 && s.eta <= 1.0, "conversion efficiency eta must lie in [0, 1]");
}

double effective_rabi(const DriveParams& drive) { return std::hypot(drive.omega_c, drive.delta_c); }

double total_rabi(const ChirpedOscParams& p) { return std::hypot(p.delta, p.omega_n); }

CollectiveRabi collective_rabi(const CollectiveSizeParams& s) {
  const double enhanced = s.n_m_prime / std::sqrt(s.n_m) * std::sqrt(s.eta) * s.omega_g;
  const double detected = s.n_m_prime / s.n_m * std::sqrt(1.0 - s.eta) * s.omega;
  return {enhanced + detected, detected};
}

double chirp_factor(double chirp, double t) {
  const double ct = chirp * t;
  return std::sqrt(0.5 * (std::exp(-ct * ct) + 1.0));
}

double chirp_phase(double chirp, double omega, double t) { return chirp_factor(chirp, t) * omega * t; }

double instantaneous_frequency(double chirp, double omega, double t) {
  const double u = chirp * chirp * t * t;
  return omega * (1.0 + std::exp(-u) * (1.0 - u)) / (2.0 * chirp_factor(chirp, t));
}

double retrieval_probability(const ChirpedOscParams& p, double t) {
  const double dt = t - p.t0;
  const double envelope = std::exp(-p.beta * p.beta * dt * dt);
  return envelope * (1.0 - std::cos(chirp_phase(p.chirp, total_rabi(p), t)));
}

}  // namespace collrabi
