#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "collrabi/analysis.hpp"
#include "collrabi/errors.hpp"
#include "collrabi/kernels.hpp"
#include "collrabi/models.hpp"

namespace collrabi {

// single:        A P_s(t) + B
//                parameters A, B, beta, C, t0, omega_n, alpha
// two_component: A1 P_s(omega_n1) + A2 P_s(omega_n2) + B, shared beta, C, t0, alpha
//                parameters A1, A2, B, beta, C, t0, omega_n1, omega_n2, alpha
enum class FitKind { single, two_component };

struct ParameterBounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

// data: sigma from the trace. model: after a first pass, sigma^2 is the
// fitted rate and the fit is repeated (Poisson variance without the low bias
// of count-based weights).
enum class Weighting { data, model };

struct FitModelSpec {
  FitKind kind = FitKind::single;
  // Parameters held at a value; they keep that value in the result and get
  // zero variance.
  std::map<std::string, double> fixed;
  // Overrides of the default bounds.
  std::map<std::string, ParameterBounds> bounds;
  int n_nodes = 40;
  int max_iter = 500;
  Weighting weighting = Weighting::model;
};

const std::vector<std::string>& parameter_names(FitKind kind);
ParameterBounds default_bounds(const std::string& name);
void validate(const FitModelSpec& spec);

struct FitResult {
  FitKind kind = FitKind::single;
  std::vector<std::string> names;
  ParameterMap estimates;
  ParameterMap std_errors;
  Eigen::MatrixXd covariance;  // over names, (J^T W J)^-1 on the free block
  double cost = 0.0;           // sum of squared weighted residuals
  double reduced_chi2 = 0.0;
  int dof = 0;
  int n_iter = 0;
  bool converged = false;
  std::vector<double> cost_history;  // one entry per accepted step, initial cost first
  double initial_gradient = 0.0;     // projected max-norm
  double final_gradient = 0.0;
};

// Signal of a fit model at the given parameters.
std::vector<double> evaluate_fit_model(FitKind kind, const ParameterMap& params,
                                       std::span<const double> times, int n_nodes = 40);

// Starting point from the trace: amplitude and baseline from its range,
// frequencies and chirp from a chirp-matched spectral scan, t0 and beta from
// the period-averaged envelope, alpha from the default shift width.
ParameterMap initialize(const TimeTrace& trace, const FitModelSpec& spec);

// Damped least squares with Poisson weights 1/sigma_i^2. Returns
// converged = false after max_iter instead of throwing.
FitResult fit(const TimeTrace& trace, const FitModelSpec& spec, const ParameterMap& init);

// All starts threw; carries one line per start.
class MultiStartError : public AnalysisError {
 public:
  MultiStartError(const std::string& what, std::vector<std::string> diagnostics)
      : AnalysisError(what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

// Start 0 is the unperturbed initialize() point; start k > 0 scales each free
// parameter by a uniform factor in [0.8, 1.2] drawn from counter_stream(seed, k).
// Lowest cost wins, ties go to the lowest start index.
FitResult multi_start_fit(const TimeTrace& trace, const FitModelSpec& spec, int n_starts,
                          std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace collrabi
