#pragma once

#include <vector>

namespace collrabi {

// Gauss-Hermite rule for the weight exp(-x^2). Nodes ascend and are
// symmetric about zero; weights are positive and sum to sqrt(pi).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

inline constexpr int kMaxHermiteNodes = 200;

// Throws ConfigError unless 1 <= n <= kMaxHermiteNodes. Rules are computed
// once per n and shared; the returned reference stays valid for the
// lifetime of the program.
const QuadratureRule& hermite_rule(int n);

}  // namespace collrabi
