#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace collrabi {

using ParameterMap = std::map<std::string, double>;

// Forward models that can be evaluated on a time grid.
//   eq4           retrieval_probability at a single shift
//                 keys: beta, C, t0, omega_n, delta
//   eq5           broadened signal P_s
//                 keys: beta, C, t0, omega_n, alpha [, n_nodes]
//   two_component a1 P_s(omega_n1) + a2 P_s(omega_n2), shared beta, C, t0, alpha
//                 keys: beta, C, t0, omega_n1, omega_n2, alpha, a1, a2 [, n_nodes]
//   dynamics      emitted-intensity proxy of the mechanistic simulator
//                 keys: see dynamics_config_from()
enum class ModelName { eq4, eq5, two_component, dynamics };

ModelName parse_model_name(std::string_view name);
std::string_view to_string(ModelName name);

struct ModelSpec {
  ModelName name = ModelName::eq5;
  ParameterMap params;
};

// Looks up a required key; throws ConfigError naming it when absent.
double require_param(const ParameterMap& params, const std::string& key);
double param_or(const ParameterMap& params, const std::string& key, double fallback);

std::vector<double> evaluate_model(const ModelSpec& model, std::span<const double> times);

}  // namespace collrabi
