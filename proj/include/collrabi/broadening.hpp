#pragma once

#include <functional>
#include <span>
#include <vector>

#include "collrabi/core_model.hpp"
#include "collrabi/kernels.hpp"

namespace collrabi {

inline constexpr int kDefaultHermiteNodes = 40;

// Gaussian distribution of the inhomogeneous shift, weight
// sqrt(alpha/pi) exp(-alpha Delta^2) (unit mass).
struct BroadeningParams {
  double alpha = 1.0;  // us^2 / rad^2
  int n_nodes = kDefaultHermiteNodes;
};

void validate(const BroadeningParams& b);

// Broadened signal P_s(t): the Gaussian average of retrieval_probability over
// the shift. p.delta is ignored (the shift is the integration variable).
// Straightforward evaluation over the full Hermite rule.
double inhomogeneous_signal(const ChirpedOscParams& p, const BroadeningParams& b, double t);

// Adaptive Simpson integration of w(Delta) * integrand(Delta) on
// [-6 sigma, 6 sigma], sigma = 1/sqrt(2 alpha), absolute tolerance 1e-10. The
// weight is renormalized to unit mass on that interval.
// Throws NumericalError when a panel fails to converge by depth 30.
double reference_integrate(const std::function<double(double)>& integrand, double alpha);

// Same quantity as inhomogeneous_signal through reference_integrate.
double reference_integrate(const ChirpedOscParams& p, const BroadeningParams& b, double t);

// Fast evaluator for repeated use on time grids. Folds the symmetric rule
// (P_r depends on Delta^2 only) and caches the per-node Rabi frequencies for
// one (omega_n, alpha) pair.
class BroadenedSignal {
 public:
  explicit BroadenedSignal(int n_nodes = kDefaultHermiteNodes);

  // Prepares node frequencies; call before evaluate() when omega_n or alpha change.
  void prepare(double omega_n, double alpha);
  double operator()(const ChirpedOscParams& p, double t) const;

  // OpenMP over the time grid (Exec::parallel) or a plain loop.
  void evaluate(const ChirpedOscParams& p, double alpha, std::span<const double> times,
                std::span<double> out, Exec exec = Exec::parallel);

  int n_nodes() const { return n_nodes_; }

 private:
  int n_nodes_;
  std::vector<double> scaled_nodes_sq_;  // x_i^2 for folded nodes x_i >= 0
  std::vector<double> weights_;          // folded, summing to 1
  std::vector<double> node_omega_;       // sqrt(x_i^2 / alpha + omega_n^2)
};

// Serial reference for BroadenedSignal::evaluate built on inhomogeneous_signal.
void broadened_signal_reference(const ChirpedOscParams& p, const BroadeningParams& b,
                                std::span<const double> times, std::span<double> out);

// Oscillation contrast in [0, 1] over [t_lo, t_hi]: a Gaussian envelope is
// fitted to the mid-levels between neighbouring extrema, the trace is divided
// by it, and (mean max - mean min) / (mean max + mean min) is returned.
// Flat traces give 0; fewer than two extrema throw AnalysisError.
double visibility(std::span<const double> times, std::span<const double> values, double t_lo,
                  double t_hi);

}  // namespace collrabi
