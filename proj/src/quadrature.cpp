#include "collrabi/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "collrabi/errors.hpp"

namespace collrabi {

namespace {

// Orthonormal Hermite polynomial p_n(x) and its derivative.
struct HermiteValue {
  double p;
  double dp;
};

HermiteValue orthonormal_hermite(int n, double x) {
  double p_prev = 0.0;
  double p = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  for (int j = 1; j <= n; ++j) {
    const double p_next = x * std::sqrt(2.0 / j) * p - std::sqrt((j - 1.0) / j) * p_prev;
    p_prev = p;
    p = p_next;
  }
  return {p, std::sqrt(2.0 * n) * p_prev};
}

QuadratureRule compute_rule(int n) {
  // Golub-Welsch eigenvalues seed a Newton polish on the three-term
  // recurrence; weights follow from the polished derivative.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermite eigenvalue solve failed for n = " + std::to_string(n));
  }

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    HermiteValue h = orthonormal_hermite(n, x);
    for (int iter = 0; iter < 8; ++iter) {
      const double step = h.p / h.dp;
      x -= step;
      h = orthonormal_hermite(n, x);
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / (h.dp * h.dp);
  }

  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& hermite_rule(int n) {
  if (n < 1 || n > kMaxHermiteNodes) {
    throw ConfigError("Hermite node count must lie in [1, " + std::to_string(kMaxHermiteNodes) +
                      "], got " + std::to_string(n));
  }
  static std::array<std::unique_ptr<const QuadratureRule>, kMaxHermiteNodes + 1> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  auto& slot = cache[static_cast<std::size_t>(n)];
  if (!slot) slot = std::make_unique<const QuadratureRule>(compute_rule(n));
  return *slot;
}

}  // namespace collrabi
