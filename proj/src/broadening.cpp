#include "collrabi/broadening.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "collrabi/errors.hpp"
#include "collrabi/quadrature.hpp"
#include "collrabi/units.hpp"

namespace collrabi {

void validate(const BroadeningParams& b) {
  if (!(b.alpha > 0.0) || !std::isfinite(b.alpha)) {
    throw ConfigError("broadening coefficient alpha must be finite and > 0");
  }
  if (b.n_nodes < 1) throw ConfigError("quadrature node count must be >= 1");
}

double inhomogeneous_signal(const ChirpedOscParams& p, const BroadeningParams& b, double t) {
  const QuadratureRule& rule = hermite_rule(b.n_nodes);
  const double scale = 1.0 / std::sqrt(b.alpha);
  ChirpedOscParams shifted = p;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    shifted.delta = rule.nodes[i] * scale;
    sum += rule.weights[i] * retrieval_probability(shifted, t);
  }
  return sum / std::sqrt(std::numbers::pi);
}

namespace {

constexpr double kSimpsonTolerance = 1e-10;
constexpr int kSimpsonMaxDepth = 30;
constexpr int kSimpsonInitialPanels = 16;
constexpr double kTruncationSigmas = 6.0;

class AdaptiveSimpson {
 public:
  explicit AdaptiveSimpson(const std::function<double(double)>& f) : f_(f) {}

  double integrate(double a, double b, double tol) {
    const double width = (b - a) / kSimpsonInitialPanels;
    double total = 0.0;
    for (int k = 0; k < kSimpsonInitialPanels; ++k) {
      const double lo = a + k * width;
      const double hi = (k + 1 == kSimpsonInitialPanels) ? b : lo + width;
      const double flo = f_(lo);
      const double fhi = f_(hi);
      const double mid = 0.5 * (lo + hi);
      const double fmid = f_(mid);
      const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
      total += refine(lo, hi, flo, fmid, fhi, whole, tol / kSimpsonInitialPanels, 0);
    }
    return total;
  }

 private:
  double refine(double a, double b, double fa, double fm, double fb, double whole, double eps,
                int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f_(lm);
    const double frm = f_(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right);
    if (std::abs(delta) <= 15.0 * std::max(eps, floor)) return left + right + delta / 15.0;
    if (depth >= kSimpsonMaxDepth) {
      std::ostringstream msg;
      msg << "adaptive Simpson did not converge on [" << a << ", " << b << "] at depth " << depth
          << " (error estimate " << std::abs(delta) / 15.0 << ", target " << eps << ")";
      throw NumericalError(msg.str());
    }
    return refine(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
           refine(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
  }

  const std::function<double(double)>& f_;
};

}  // namespace

double reference_integrate(const std::function<double(double)>& integrand, double alpha) {
  validate(BroadeningParams{alpha, 1});
  const double sigma = units::sigma_from_alpha(alpha);
  // Renormalized to unit mass on the truncated support.
  const double norm = std::sqrt(alpha / std::numbers::pi) / std::erf(kTruncationSigmas / std::numbers::sqrt2);
  const std::function<double(double)> weighted = [&](double delta) {
    return norm * std::exp(-alpha * delta * delta) * integrand(delta);
  };
  AdaptiveSimpson simpson(weighted);
  return simpson.integrate(-kTruncationSigmas * sigma, kTruncationSigmas * sigma,
                           kSimpsonTolerance);
}

double reference_integrate(const ChirpedOscParams& p, const BroadeningParams& b, double t) {
  ChirpedOscParams shifted = p;
  return reference_integrate(
      [&](double delta) {
        shifted.delta = delta;
        return retrieval_probability(shifted, t);
      },
      b.alpha);
}

BroadenedSignal::BroadenedSignal(int n_nodes) : n_nodes_(n_nodes) {
  const QuadratureRule& rule = hermite_rule(n_nodes);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  // Nodes ascend and are symmetric: fold the negative half onto the positive one.
  const std::size_t n = rule.size();
  for (std::size_t i = n / 2; i < n; ++i) {
    const bool is_center = (n % 2 == 1) && i == n / 2;
    scaled_nodes_sq_.push_back(rule.nodes[i] * rule.nodes[i]);
    weights_.push_back((is_center ? 1.0 : 2.0) * rule.weights[i] * inv_sqrt_pi);
  }
  node_omega_.resize(weights_.size());
}

void BroadenedSignal::prepare(double omega_n, double alpha) {
  const double inv_alpha = 1.0 / alpha;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    node_omega_[i] = std::sqrt(scaled_nodes_sq_[i] * inv_alpha + omega_n * omega_n);
  }
}

double BroadenedSignal::operator()(const ChirpedOscParams& p, double t) const {
  const double dt = t - p.t0;
  const double envelope = std::exp(-p.beta * p.beta * dt * dt);
  const double scaled_time = chirp_factor(p.chirp, t) * t;
  // Accumulate 1 - cos per node so that t = 0 gives exactly 0.
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    sum += weights_[i] * (1.0 - std::cos(node_omega_[i] * scaled_time));
  }
  return envelope * sum;
}

void BroadenedSignal::evaluate(const ChirpedOscParams& p, double alpha,
                               std::span<const double> times, std::span<double> out, Exec exec) {
  prepare(p.omega_n, alpha);
  kernels::for_each_index(times.size(), exec, [&](std::size_t i) { out[i] = (*this)(p, times[i]); });
}

void broadened_signal_reference(const ChirpedOscParams& p, const BroadeningParams& b,
                                std::span<const double> times, std::span<double> out) {
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = inhomogeneous_signal(p, b, times[i]);
}

double visibility(std::span<const double> times, std::span<const double> values, double t_lo,
                  double t_hi) {
  if (times.size() != values.size()) throw AnalysisError("visibility: length mismatch");
  std::vector<double> t;
  std::vector<double> v;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_lo && times[i] <= t_hi) {
      t.push_back(times[i]);
      v.push_back(values[i]);
    }
  }
  if (v.empty()) throw AnalysisError("visibility: window contains no samples");
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  if (*hi_it - *lo_it <= 1e-12 * std::max(1.0, std::abs(*hi_it))) return 0.0;

  struct Extremum {
    double t;
    double v;
    bool is_max;
  };
  std::vector<Extremum> extrema;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) extrema.push_back({t[i], v[i], true});
    else if (v[i] < v[i - 1] && v[i] <= v[i + 1]) extrema.push_back({t[i], v[i], false});
  }
  const auto n_max = std::count_if(extrema.begin(), extrema.end(), [](const Extremum& e) { return e.is_max; });
  if (extrema.size() < 2 || n_max == 0 || n_max == static_cast<long>(extrema.size())) {
    throw AnalysisError("visibility: window needs at least one maximum and one minimum, found " +
                        std::to_string(extrema.size()) + " extrema");
  }

  // Mid-levels between neighbouring max/min pairs trace the envelope.
  std::vector<double> mid_t;
  std::vector<double> mid_log;
  for (std::size_t k = 0; k + 1 < extrema.size(); ++k) {
    if (extrema[k].is_max == extrema[k + 1].is_max) continue;
    const double level = 0.5 * (extrema[k].v + extrema[k + 1].v);
    if (level <= 0.0) continue;
    mid_t.push_back(0.5 * (extrema[k].t + extrema[k + 1].t));
    mid_log.push_back(std::log(level));
  }
  if (mid_t.empty()) throw AnalysisError("visibility: no positive envelope levels in window");

  // log(a exp(-beta^2 (t - t0)^2)) is a quadratic in t.
  const Eigen::Index degree = std::min<Eigen::Index>(2, static_cast<Eigen::Index>(mid_t.size()) - 1);
  const double t_ref = 0.5 * (t.front() + t.back());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(mid_t.size()), degree + 1);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(mid_t.size()));
  for (std::size_t k = 0; k < mid_t.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    for (Eigen::Index d = 0; d <= degree; ++d) design(row, d) = std::pow(mid_t[k] - t_ref, static_cast<double>(d));
    rhs(row) = mid_log[k];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  auto envelope = [&](double time) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d <= degree; ++d) acc += coef(d) * std::pow(time - t_ref, static_cast<double>(d));
    return std::exp(acc);
  };

  double sum_max = 0.0;
  double sum_min = 0.0;
  long n_min = 0;
  for (const Extremum& e : extrema) {
    const double normalized = e.v / envelope(e.t);
    if (e.is_max) {
      sum_max += normalized;
    } else {
      sum_min += normalized;
      ++n_min;
    }
  }
  const double mean_max = sum_max / static_cast<double>(n_max);
  const double mean_min = sum_min / static_cast<double>(n_min);
  if (mean_max + mean_min <= 0.0) return 0.0;
  return std::clamp((mean_max - mean_min) / (mean_max + mean_min), 0.0, 1.0);
}

}  // namespace collrabi
