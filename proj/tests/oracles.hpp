#pragma once

// Independent re-implementations used as test oracles. They share no code
// with the library and favour plain formulas over speed.

#include <cmath>
#include <vector>

namespace oracle {

inline long double retrieval(long double beta, long double c, long double t0, long double omega_n,
                             long double delta, long double t) {
  const long double omega = std::sqrt(delta * delta + omega_n * omega_n);
  const long double chi = std::sqrt((std::exp(-c * c * t * t) + 1.0L) / 2.0L);
  return std::exp(-beta * beta * (t - t0) * (t - t0)) * (1.0L - std::cos(chi * omega * t));
}

// Gaussian average of retrieval() by a dense trapezoid rule over +-9 sigma.
// The integrand is smooth and decays like a Gaussian, so the rule converges
// geometrically once the Rabi oscillation in Delta is resolved.
inline double broadened(double beta, double c, double t0, double omega_n, double alpha, double t,
                        int n = 24001) {
  const long double sigma = 1.0L / std::sqrt(2.0L * alpha);
  const long double lo = -9.0L * sigma;
  const long double h = 18.0L * sigma / (n - 1);
  const long double norm = std::sqrt(static_cast<long double>(alpha) / 3.14159265358979323846264338327950288L);
  long double sum = 0.0L;
  for (int i = 0; i < n; ++i) {
    const long double d = lo + h * i;
    const long double w = (i == 0 || i == n - 1) ? 0.5L : 1.0L;
    sum += w * norm * std::exp(-alpha * d * d) * retrieval(beta, c, t0, omega_n, d, t);
  }
  return static_cast<double>(sum * h);
}

// Strict local maxima of a sampled function.
inline std::vector<double> brute_maxima(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] > y[i + 1]) out.push_back(t[i]);
  }
  return out;
}

}  // namespace oracle
