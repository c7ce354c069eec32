#include "collrabi/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "collrabi/broadening.hpp"
#include "collrabi/core_model.hpp"
#include "collrabi/rng.hpp"
#include "collrabi/units.hpp"

namespace collrabi {

namespace {

constexpr double kDefaultSigmaDeltaMHz = 2.5;
constexpr double kRelativeStep = 1e-6;
constexpr double kAbsoluteStep = 1e-9;
constexpr double kCostTolerance = 1e-10;
constexpr int kReweightPasses = 10;
// Largest parameter change between passes, in standard errors.
constexpr double kReweightTolerance = 1e-3;
constexpr double kRelativeGradientTarget = 1e-6;
constexpr double kNoGradientTarget = std::numeric_limits<double>::infinity();
constexpr double kGradientTolerance = 1e-8;
constexpr double kInitialDamping = 1e-3;
constexpr double kMaxDamping = 1e16;
constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kSingleNames = {"A", "B", "beta", "C", "t0", "omega_n", "alpha"};
const std::vector<std::string> kDoubleNames = {"A1", "A2", "B", "beta", "C", "t0", "omega_n1", "omega_n2", "alpha"};

double default_alpha() { return units::alpha_from_sigma(units::mhz_to_angular(kDefaultSigmaDeltaMHz)); }

// Model evaluation for both fit kinds over one trace grid.
class FitModel {
 public:
  FitModel(FitKind kind, std::span<const double> times, int n_nodes)
      : kind_(kind), times_(times), signal_(n_nodes), scratch_(times.size()) {}

  // Parameters in parameter_names(kind) order.
  void evaluate(const Eigen::VectorXd& p, std::span<double> out) {
    if (kind_ == FitKind::single) {
      const ChirpedOscParams osc{p(2), p(3), p(4), p(5), 0.0};
      signal_.evaluate(osc, p(6), times_, out, Exec::serial);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = p(0) * out[i] + p(1);
      return;
    }
    const ChirpedOscParams first{p(3), p(4), p(5), p(6), 0.0};
    const ChirpedOscParams second{p(3), p(4), p(5), p(7), 0.0};
    signal_.evaluate(first, p(8), times_, out, Exec::serial);
    signal_.evaluate(second, p(8), times_, scratch_, Exec::serial);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p(0) * out[i] + p(1) * scratch_[i] + p(2);
  }

 private:
  FitKind kind_;
  std::span<const double> times_;
  BroadenedSignal signal_;
  std::vector<double> scratch_;
};

Eigen::VectorXd to_vector(FitKind kind, const ParameterMap& params) {
  const auto& names = parameter_names(kind);
  Eigen::VectorXd p(static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto it = params.find(names[k]);
    if (it == params.end()) throw ConfigError("missing fit parameter '" + names[k] + "'");
    p(static_cast<Eigen::Index>(k)) = it->second;
  }
  return p;
}

ParameterMap to_map(FitKind kind, const Eigen::VectorXd& p) {
  const auto& names = parameter_names(kind);
  ParameterMap out;
  for (std::size_t k = 0; k < names.size(); ++k) out[names[k]] = p(static_cast<Eigen::Index>(k));
  return out;
}

// ---------------------------------------------------------------------------
// Initialization

struct SpectralPeak {
  double omega;
  double magnitude;
};

// |sum_i x_i exp(-i omega tau_i)| on a uniform omega grid.
std::vector<double> spectrum(std::span<const double> x, std::span<const double> tau,
                             const std::vector<double>& omegas) {
  std::vector<double> mag(omegas.size());
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double phase = omegas[k] * tau[i];
      re += x[i] * std::cos(phase);
      im -= x[i] * std::sin(phase);
    }
    mag[k] = std::hypot(re, im);
  }
  return mag;
}

// Largest local maxima at least min_separation apart, parabolically refined.
std::vector<SpectralPeak> top_peaks(const std::vector<double>& omegas, const std::vector<double>& mag,
                                    std::size_t count, double min_separation) {
  std::vector<SpectralPeak> candidates;
  const double step = omegas.size() > 1 ? omegas[1] - omegas[0] : 0.0;
  for (std::size_t k = 1; k + 1 < mag.size(); ++k) {
    if (!(mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])) continue;
    const double curvature = mag[k - 1] - 2.0 * mag[k] + mag[k + 1];
    double offset = 0.0;
    if (curvature < 0.0) offset = std::clamp(0.5 * (mag[k - 1] - mag[k + 1]) / curvature, -0.5, 0.5);
    candidates.push_back({omegas[k] + offset * step, mag[k]});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SpectralPeak& a, const SpectralPeak& b) { return a.magnitude > b.magnitude; });
  std::vector<SpectralPeak> picked;
  for (const SpectralPeak& c : candidates) {
    const bool clear = std::all_of(picked.begin(), picked.end(), [&](const SpectralPeak& q) {
      return std::abs(q.omega - c.omega) >= min_separation;
    });
    if (clear) picked.push_back(c);
    if (picked.size() == count) break;
  }
  return picked;
}

struct ChirpScan {
  double chirp = 0.0;
  std::vector<SpectralPeak> peaks;  // strongest first
};

// Dechirps the time axis, tau = chirp_factor(C, t) t, for a grid of C and
// keeps the C whose spectrum concentrates most power in `count` lines.
ChirpScan chirp_matched_scan(const TimeTrace& trace, std::size_t count) {
  const std::size_t n = trace.size();
  double mean = 0.0;
  for (double c : trace.counts) mean += c;
  mean /= static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = trace.counts[i] - mean;

  const double h = trace.bin_width();
  const double span = trace.times.back() - trace.times.front();
  const double t_max = std::max(std::abs(trace.times.front()), std::abs(trace.times.back()));
  // Skip the envelope's low-frequency lobe: three resolution cells.
  const double omega_lo = units::kTwoPi * 3.0 / span;
  const double omega_hi = std::numbers::pi / h;
  const double d_omega = units::kTwoPi / (4.0 * span);
  std::vector<double> omegas;
  for (double w = omega_lo; w <= omega_hi; w += d_omega) omegas.push_back(w);
  if (omegas.size() < 3) throw InitializationError("trace too short for a spectral estimate");

  constexpr int kChirpSteps = 16;
  constexpr double kMaxChirpTime = 3.0;  // largest C * t_max scanned
  ChirpScan best;
  double best_score = -1.0;
  std::vector<double> tau(n);
  for (int k = 0; k < kChirpSteps; ++k) {
    const double chirp = (t_max > 0.0) ? kMaxChirpTime * k / (kChirpSteps - 1) / t_max : 0.0;
    for (std::size_t i = 0; i < n; ++i) tau[i] = chirp_factor(chirp, trace.times[i]) * trace.times[i];
    const std::vector<double> mag = spectrum(x, tau, omegas);
    std::vector<SpectralPeak> peaks = top_peaks(omegas, mag, count, units::kTwoPi / span);
    if (peaks.size() < count) continue;
    double score = 0.0;
    for (const SpectralPeak& p : peaks) score += p.magnitude;
    if (score > best_score) {
      best_score = score;
      best = {chirp, std::move(peaks)};
    }
  }
  if (best.peaks.size() < count) {
    throw InitializationError("could not resolve " + std::to_string(count) + " spectral line(s)");
  }
  return best;
}

}  // namespace

const std::vector<std::string>& parameter_names(FitKind kind) {
  return kind == FitKind::single ? kSingleNames : kDoubleNames;
}

ParameterBounds default_bounds(const std::string& name) {
  if (name == "t0") return {-kInf, kInf};
  if (name == "B") return {-kInf, kInf};
  if (name == "alpha") return {1e-12, kInf};
  return {0.0, kInf};
}

void validate(const FitModelSpec& spec) {
  const auto& names = parameter_names(spec.kind);
  auto known = [&](const std::string& key) { return std::find(names.begin(), names.end(), key) != names.end(); };
  for (const auto& [key, value] : spec.fixed) {
    if (!known(key)) throw ConfigError("unknown fixed parameter '" + key + "'");
    if (!std::isfinite(value)) throw ConfigError("fixed parameter '" + key + "' must be finite");
  }
  for (const auto& [key, b] : spec.bounds) {
    if (!known(key)) throw ConfigError("unknown bounded parameter '" + key + "'");
    if (!(b.lo <= b.hi)) throw ConfigError("bounds of '" + key + "' are not ordered");
  }
  if (spec.n_nodes < 1) throw ConfigError("fit quadrature node count must be >= 1");
  if (spec.max_iter < 1) throw ConfigError("fit max_iter must be >= 1");
}

std::vector<double> evaluate_fit_model(FitKind kind, const ParameterMap& params,
                                       std::span<const double> times, int n_nodes) {
  FitModel model(kind, times, n_nodes);
  std::vector<double> out(times.size());
  model.evaluate(to_vector(kind, params), out);
  return out;
}

ParameterMap initialize(const TimeTrace& trace, const FitModelSpec& spec) {
  validate(spec);
  validate(trace);
  if (trace.size() < 16) {
    throw InitializationError("initialization needs at least 16 bins, got " + std::to_string(trace.size()));
  }
  const std::vector<double> smooth = moving_average(trace.counts, kCountsSmoothing);
  const auto [lo_it, hi_it] = std::minmax_element(smooth.begin(), smooth.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(hi)))) {
    throw InitializationError("trace is flat; nothing to fit");
  }

  const std::size_t n_lines = spec.kind == FitKind::single ? 1 : 2;
  const ChirpScan scan = chirp_matched_scan(trace, n_lines);

  // Envelope: two passes of a two-period box filter. The chirp stretches
  // late periods, so a single one-period box leaves a ripple.
  const double h = trace.bin_width();
  const double period = units::kTwoPi / scan.peaks.front().omega;
  const int half_window = std::max(1, static_cast<int>(std::lround(period / h)));
  const std::vector<double> envelope = moving_average(moving_average(trace.counts, half_window), half_window);
  const auto peak_it = std::max_element(envelope.begin(), envelope.end());
  const auto peak = static_cast<std::size_t>(peak_it - envelope.begin());
  const double t0 = trace.times[peak];
  const double half_level = lo + 0.5 * (*peak_it - lo);
  std::optional<double> left;
  std::optional<double> right;
  for (std::size_t k = peak; k-- > 0;) {
    if (envelope[k] <= half_level) {
      const double frac = (half_level - envelope[k]) / (envelope[k + 1] - envelope[k]);
      left = trace.times[k] + frac * h;
      break;
    }
  }
  for (std::size_t k = peak + 1; k < envelope.size(); ++k) {
    if (envelope[k] <= half_level) {
      const double frac = (envelope[k - 1] - half_level) / (envelope[k - 1] - envelope[k]);
      right = trace.times[k - 1] + frac * h;
      break;
    }
  }
  double fwhm = trace.times.back() - trace.times.front();
  if (left && right) fwhm = *right - *left;
  else if (left) fwhm = 2.0 * (t0 - *left);
  else if (right) fwhm = 2.0 * (*right - t0);
  const double beta = 2.0 * std::sqrt(std::log(2.0)) / std::max(fwhm, h);

  // C = 0 is a stationary point of the C^2-dependent model; start just off it.
  const double t_max = std::max(std::abs(trace.times.front()), std::abs(trace.times.back()));
  const double chirp = std::max(scan.chirp, 0.1 / t_max);

  ParameterMap init;
  init["B"] = lo;
  init["beta"] = beta;
  init["C"] = chirp;
  init["t0"] = t0;
  init["alpha"] = default_alpha();
  if (spec.kind == FitKind::single) {
    init["A"] = hi - lo;
    init["omega_n"] = scan.peaks.front().omega;
  } else {
    auto lines = scan.peaks;
    const double total = lines[0].magnitude + lines[1].magnitude;
    std::sort(lines.begin(), lines.end(), [](const SpectralPeak& a, const SpectralPeak& b) { return a.omega < b.omega; });
    init["A1"] = (hi - lo) * lines[0].magnitude / total;
    init["A2"] = (hi - lo) * lines[1].magnitude / total;
    init["omega_n1"] = lines[0].omega;
    init["omega_n2"] = lines[1].omega;
  }
  for (const auto& [key, value] : spec.fixed) init[key] = value;
  return init;
}

// ---------------------------------------------------------------------------
// Damped least squares

namespace {

class LeastSquares {
 public:
  LeastSquares(const TimeTrace& trace, const FitModelSpec& spec)
      : trace_(trace), model_(spec.kind, trace.times, spec.n_nodes) {
    const auto& names = parameter_names(spec.kind);
    const auto n_params = static_cast<Eigen::Index>(names.size());
    lo_.resize(n_params);
    hi_.resize(n_params);
    for (Eigen::Index k = 0; k < n_params; ++k) {
      const std::string& name = names[static_cast<std::size_t>(k)];
      ParameterBounds b = default_bounds(name);
      if (const auto it = spec.bounds.find(name); it != spec.bounds.end()) b = it->second;
      lo_(k) = b.lo;
      hi_(k) = b.hi;
      if (!spec.fixed.contains(name)) free_.push_back(k);
    }
    const auto n = static_cast<Eigen::Index>(trace.size());
    inv_sigma_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = trace.sigma[static_cast<std::size_t>(i)];
      inv_sigma_(i) = 1.0 / (s > 0.0 ? s : poisson_sigma(trace.counts[static_cast<std::size_t>(i)]));
    }
    buffer_.resize(trace.size());
  }

  Eigen::VectorXd project(Eigen::VectorXd p) const { return p.cwiseMax(lo_).cwiseMin(hi_); }

  // Weighted residuals (y - m) / sigma.
  Eigen::VectorXd residuals(const Eigen::VectorXd& p) {
    model_.evaluate(p, buffer_);
    Eigen::VectorXd r(static_cast<Eigen::Index>(buffer_.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const auto u = static_cast<std::size_t>(i);
      r(i) = (trace_.counts[u] - buffer_[u]) * inv_sigma_(i);
    }
    if (!r.allFinite()) throw NumericalError("model produced non-finite values during fit");
    return r;
  }

  // Weighted Jacobian of the model (d m / d p) / sigma over the free parameters.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) {
    const auto n = static_cast<Eigen::Index>(trace_.size());
    Eigen::MatrixXd jac(n, static_cast<Eigen::Index>(free_.size()));
    std::vector<double> plus(trace_.size());
    std::vector<double> minus(trace_.size());
    for (std::size_t c = 0; c < free_.size(); ++c) {
      const Eigen::Index k = free_[c];
      const double step = std::max(kRelativeStep * std::abs(p(k)), kAbsoluteStep);
      Eigen::VectorXd up = p;
      Eigen::VectorXd down = p;
      double width = 2.0 * step;
      if (p(k) - step < lo_(k)) {
        up(k) += step;
        width = step;
      } else if (p(k) + step > hi_(k)) {
        down(k) -= step;
        width = step;
      } else {
        up(k) += step;
        down(k) -= step;
      }
      model_.evaluate(up, plus);
      model_.evaluate(down, minus);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        jac(i, static_cast<Eigen::Index>(c)) = (plus[u] - minus[u]) / width * inv_sigma_(i);
      }
    }
    return jac;
  }

  // Max-norm of the descent direction J^T r, ignoring components that push
  // a parameter sitting on a bound further out.
  double projected_gradient(const Eigen::VectorXd& p, const Eigen::VectorXd& g) const {
    double norm = 0.0;
    for (std::size_t c = 0; c < free_.size(); ++c) {
      if (blocked(p, g, c)) continue;
      norm = std::max(norm, std::abs(g(static_cast<Eigen::Index>(c))));
    }
    return norm;
  }

  bool blocked(const Eigen::VectorXd& p, const Eigen::VectorXd& g, std::size_t c) const {
    const Eigen::Index k = free_[c];
    const double gc = g(static_cast<Eigen::Index>(c));
    return (p(k) <= lo_(k) && gc < 0.0) || (p(k) >= hi_(k) && gc > 0.0);
  }

  const std::vector<Eigen::Index>& free() const { return free_; }

 private:
  const TimeTrace& trace_;
  FitModel model_;
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
  Eigen::VectorXd inv_sigma_;
  std::vector<Eigen::Index> free_;
  std::vector<double> buffer_;
};

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double cutoff = 1e-14 * std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) inv(k) = values(k) > cutoff ? 1.0 / values(k) : 0.0;
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

void canonicalize(FitResult& result) {
  if (result.kind != FitKind::two_component) return;
  if (!(result.estimates["omega_n1"] > result.estimates["omega_n2"])) return;
  // Swap (A1, omega_n1) with (A2, omega_n2), including the covariance.
  const std::vector<std::pair<Eigen::Index, Eigen::Index>> swaps = {{0, 1}, {6, 7}};
  Eigen::VectorXi perm = Eigen::VectorXi::LinSpaced(static_cast<int>(result.names.size()), 0,
                                                    static_cast<int>(result.names.size()) - 1);
  for (const auto& [a, b] : swaps) {
    std::swap(result.estimates[result.names[static_cast<std::size_t>(a)]],
              result.estimates[result.names[static_cast<std::size_t>(b)]]);
    std::swap(result.std_errors[result.names[static_cast<std::size_t>(a)]],
              result.std_errors[result.names[static_cast<std::size_t>(b)]]);
    std::swap(perm(a), perm(b));
  }
  Eigen::MatrixXd permuted(result.covariance.rows(), result.covariance.cols());
  for (Eigen::Index i = 0; i < permuted.rows(); ++i) {
    for (Eigen::Index j = 0; j < permuted.cols(); ++j) permuted(i, j) = result.covariance(perm(i), perm(j));
  }
  result.covariance = permuted;
}

// The small-decrease stop only applies once the projected gradient is below
// gradient_target (infinity: always).
FitResult fit_once(const TimeTrace& trace, const FitModelSpec& spec, const ParameterMap& init,
                   double gradient_target) {
  LeastSquares problem(trace, spec);
  const auto& names = parameter_names(spec.kind);
  ParameterMap start = init;
  for (const auto& [key, value] : spec.fixed) start[key] = value;
  Eigen::VectorXd p = problem.project(to_vector(spec.kind, start));
  const auto& free = problem.free();
  const auto n_free = static_cast<Eigen::Index>(free.size());
  const auto n_data = static_cast<Eigen::Index>(trace.size());
  if (n_data <= n_free) throw AnalysisError("fewer data points than free parameters");

  FitResult result;
  result.kind = spec.kind;
  result.names = names;
  result.dof = static_cast<int>(n_data - n_free);

  Eigen::VectorXd r = problem.residuals(p);
  double cost = r.squaredNorm();
  result.cost_history.push_back(cost);

  Eigen::MatrixXd jac = problem.jacobian(p);
  Eigen::VectorXd g = jac.transpose() * r;
  Eigen::MatrixXd normal = jac.transpose() * jac;
  result.initial_gradient = problem.projected_gradient(p, g);
  double gradient = result.initial_gradient;

  double damping = kInitialDamping;
  int iter = 0;
  bool converged = cost == 0.0 || gradient < kGradientTolerance;
  while (!converged && iter < spec.max_iter) {
    ++iter;
    // Parameters on a bound whose gradient points outward stay put.
    std::vector<Eigen::Index> active;
    for (std::size_t c = 0; c < free.size(); ++c) {
      if (!problem.blocked(p, g, c)) active.push_back(static_cast<Eigen::Index>(c));
    }
    const auto m = static_cast<Eigen::Index>(active.size());
    if (m == 0) {
      converged = true;
      break;
    }
    Eigen::MatrixXd lhs(m, m);
    Eigen::VectorXd rhs(m);
    double max_diag = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) max_diag = std::max(max_diag, normal(active[a], active[a]));
    for (Eigen::Index a = 0; a < m; ++a) {
      rhs(a) = g(active[a]);
      for (Eigen::Index b = 0; b < m; ++b) lhs(a, b) = normal(active[a], active[b]);
      const double scale = std::max(normal(active[a], active[a]), 1e-12 * max_diag + 1e-300);
      lhs(a, a) += damping * scale;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
    const Eigen::VectorXd delta = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
      throw NumericalError("singular normal equations at damping " + std::to_string(damping));
    }
    Eigen::VectorXd trial = p;
    for (Eigen::Index a = 0; a < m; ++a) trial(free[static_cast<std::size_t>(active[a])]) += delta(a);
    trial = problem.project(trial);

    const Eigen::VectorXd r_trial = problem.residuals(trial);
    const double trial_cost = r_trial.squaredNorm();
    if (trial_cost < cost) {
      const double relative = (cost - trial_cost) / cost;
      p = trial;
      r = r_trial;
      cost = trial_cost;
      result.cost_history.push_back(cost);
      damping = std::max(damping / 3.0, 1e-300);
      jac = problem.jacobian(p);
      g = jac.transpose() * r;
      normal = jac.transpose() * jac;
      gradient = problem.projected_gradient(p, g);
      const bool small_step = relative < kCostTolerance && gradient < gradient_target;
      if (small_step || gradient < kGradientTolerance || cost == 0.0) converged = true;
    } else {
      damping *= 3.0;
      // No decrease is reachable even for vanishing steps: a minimum to
      // working precision.
      if (damping > kMaxDamping) converged = true;
    }
  }

  result.n_iter = iter;
  result.converged = converged;
  result.cost = cost;
  result.final_gradient = gradient;
  result.reduced_chi2 = cost / result.dof;
  result.estimates = to_map(spec.kind, p);

  const auto n_params = static_cast<Eigen::Index>(names.size());
  result.covariance = Eigen::MatrixXd::Zero(n_params, n_params);
  const Eigen::MatrixXd free_cov = pseudo_inverse(normal);
  for (Eigen::Index a = 0; a < n_free; ++a) {
    for (Eigen::Index b = 0; b < n_free; ++b) {
      result.covariance(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]) = free_cov(a, b);
    }
  }
  for (Eigen::Index k = 0; k < n_params; ++k) {
    result.std_errors[names[static_cast<std::size_t>(k)]] = std::sqrt(std::max(result.covariance(k, k), 0.0));
  }
  return result;
}

}  // namespace

FitResult fit(const TimeTrace& trace, const FitModelSpec& spec, const ParameterMap& init) {
  validate(spec);
  validate(trace);
  FitResult result = fit_once(trace, spec, init, kNoGradientTarget);
  if (spec.weighting == Weighting::model && result.converged) {
    const double initial_gradient = result.initial_gradient;
    // Weights from counts bias low-count bins; refit with the variance taken
    // from the fitted rates until the estimates settle.
    TimeTrace reweighted = trace;
    int total_iter = result.n_iter;
    for (int pass = 0; pass < kReweightPasses; ++pass) {
      const std::vector<double> rates = evaluate_fit_model(spec.kind, result.estimates, trace.times, spec.n_nodes);
      for (std::size_t i = 0; i < rates.size(); ++i) reweighted.sigma[i] = poisson_sigma(std::max(rates[i], 0.0));
      const ParameterMap previous = result.estimates;
      result = fit_once(reweighted, spec, previous, kRelativeGradientTarget * initial_gradient);
      result.initial_gradient = initial_gradient;
      total_iter += result.n_iter;
      double change = 0.0;
      for (const auto& [name, value] : result.estimates) {
        const double se = result.std_errors.at(name);
        if (se > 0.0) change = std::max(change, std::abs(value - previous.at(name)) / se);
      }
      if (change < kReweightTolerance) break;
    }
    result.n_iter = total_iter;
  }
  canonicalize(result);
  return result;
}

FitResult multi_start_fit(const TimeTrace& trace, const FitModelSpec& spec, int n_starts,
                          std::uint64_t seed, Exec exec) {
  if (n_starts < 1) throw ConfigError("multi-start fit needs n_starts >= 1");
  const ParameterMap base = initialize(trace, spec);
  const auto& names = parameter_names(spec.kind);

  std::vector<ParameterMap> starts(static_cast<std::size_t>(n_starts), base);
  for (int k = 1; k < n_starts; ++k) {
    SplitMix64 rng = counter_stream(seed, static_cast<std::uint64_t>(k));
    for (const std::string& name : names) {
      const double factor = 0.8 + 0.4 * rng.uniform();
      if (!spec.fixed.contains(name)) starts[static_cast<std::size_t>(k)][name] *= factor;
    }
  }

  std::vector<std::optional<FitResult>> results(starts.size());
  std::vector<std::string> errors(starts.size());
  kernels::for_each_index(starts.size(), exec, [&](std::size_t k) {
    try {
      results[k] = fit(trace, spec, starts[k]);
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  });

  // Converged results beat non-converged ones; then lowest cost, lowest index.
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (!results[k]) continue;
    if (!best) {
      best = k;
      continue;
    }
    const FitResult& a = *results[k];
    const FitResult& b = *results[*best];
    if ((a.converged && !b.converged) || (a.converged == b.converged && a.cost < b.cost)) best = k;
  }
  if (!best) {
    std::vector<std::string> diagnostics;
    for (std::size_t k = 0; k < errors.size(); ++k) {
      diagnostics.push_back("start " + std::to_string(k) + ": " + errors[k]);
    }
    throw MultiStartError("all " + std::to_string(n_starts) + " fit starts failed", std::move(diagnostics));
  }
  return *results[*best];
}

}  // namespace collrabi
