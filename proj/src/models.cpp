#include "collrabi/models.hpp"

#include <algorithm>
#include <cmath>

#include "collrabi/broadening.hpp"
#include "collrabi/core_model.hpp"
#include "collrabi/dynamics.hpp"
#include "collrabi/errors.hpp"

namespace collrabi {

ModelName parse_model_name(std::string_view name) {
  if (name == "eq4") return ModelName::eq4;
  if (name == "eq5") return ModelName::eq5;
  if (name == "double") return ModelName::two_component;
  if (name == "dynamics") return ModelName::dynamics;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected eq4, eq5, double, dynamics)");
}

std::string_view to_string(ModelName name) {
  switch (name) {
    case ModelName::eq4: return "eq4";
    case ModelName::eq5: return "eq5";
    case ModelName::two_component: return "double";
    case ModelName::dynamics: return "dynamics";
  }
  return "?";
}

double require_param(const ParameterMap& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) throw ConfigError("missing model parameter '" + key + "'");
  return it->second;
}

double param_or(const ParameterMap& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

namespace {

int node_count(const ParameterMap& params) {
  return static_cast<int>(std::lround(param_or(params, "n_nodes", kDefaultHermiteNodes)));
}

ChirpedOscParams oscillation(const ParameterMap& params, const std::string& omega_key) {
  ChirpedOscParams p{require_param(params, "beta"), require_param(params, "C"), require_param(params, "t0"),
                     require_param(params, omega_key), param_or(params, "delta", 0.0)};
  validate(p);
  return p;
}

std::vector<double> evaluate_dynamics(const ParameterMap& params, std::span<const double> times) {
  std::vector<double> out(times.size(), 0.0);
  if (times.empty() || times.back() <= 0.0) return out;
  DynamicsConfig cfg = dynamics_config_from(params);
  // Align the integration step with the output grid when it is uniform.
  if (times.size() > 1) {
    const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    cfg.dt = h / std::ceil(h / cfg.dt - 1e-9);
  }
  cfg.t_end = times.back() + cfg.dt;
  StateTrajectory traj;
  if (params.contains("alpha")) {
    traj = ensemble_average(cfg, BroadeningParams{require_param(params, "alpha"), node_count(params)});
  } else {
    traj = evolve(cfg);
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) continue;  // nothing is emitted before the read pulse
    const double pos = times[i] / cfg.dt;
    const auto k = std::min(static_cast<std::size_t>(pos), traj.size() - 2);
    const double frac = pos - static_cast<double>(k);
    out[i] = (1.0 - frac) * traj.intensity[k] + frac * traj.intensity[k + 1];
  }
  return out;
}

}  // namespace

std::vector<double> evaluate_model(const ModelSpec& model, std::span<const double> times) {
  const ParameterMap& params = model.params;
  std::vector<double> out(times.size());
  switch (model.name) {
    case ModelName::eq4: {
      const ChirpedOscParams p = oscillation(params, "omega_n");
      kernels::for_each_index(times.size(), Exec::parallel,
                              [&](std::size_t i) { out[i] = retrieval_probability(p, times[i]); });
      break;
    }
    case ModelName::eq5: {
      const ChirpedOscParams p = oscillation(params, "omega_n");
      const BroadeningParams b{require_param(params, "alpha"), node_count(params)};
      validate(b);
      BroadenedSignal signal(b.n_nodes);
      signal.evaluate(p, b.alpha, times, out);
      break;
    }
    case ModelName::two_component: {
      const ChirpedOscParams first = oscillation(params, "omega_n1");
      const ChirpedOscParams second = oscillation(params, "omega_n2");
      const BroadeningParams b{require_param(params, "alpha"), node_count(params)};
      validate(b);
      const double a1 = param_or(params, "a1", 0.5);
      const double a2 = param_or(params, "a2", 0.5);
      BroadenedSignal signal(b.n_nodes);
      std::vector<double> other(times.size());
      signal.evaluate(first, b.alpha, times, out);
      signal.evaluate(second, b.alpha, times, other);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a1 * out[i] + a2 * other[i];
      break;
    }
    case ModelName::dynamics:
      out = evaluate_dynamics(params, times);
      break;
  }
  return out;
}

}  // namespace collrabi
