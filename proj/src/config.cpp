#include "collrabi/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <system_error>

#include "collrabi/datagen.hpp"
#include "collrabi/errors.hpp"
#include "collrabi/fitting.hpp"
#include "collrabi/units.hpp"

namespace collrabi {

namespace {

const std::vector<std::string> kKeys = {
    "model.name",          "model.omega_n_mhz",    "model.omega_n1_mhz",   "model.omega_n2_mhz",
    "model.beta",          "model.chirp",          "model.t0",             "model.delta_mhz",
    "model.sigma_delta_mhz", "model.n_nodes",      "model.a1",             "model.a2",
    "drive.omega_c_mhz",   "drive.delta_c_mhz",    "drive.delta_p_mhz",
    "grid.t_start",        "grid.t_end",           "grid.n_bins",
    "synth.amplitude",     "synth.baseline",       "synth.seed",
    "fit.kind",            "fit.max_iter",         "fit.n_starts",         "fit.seed",
    "fit.free_alpha",      "fit.n_nodes",          "fit.weighting",
    "peaks.smooth_halfwidth", "peaks.min_prominence",
    "dynamics.n_m",        "dynamics.n_m_prime",   "dynamics.eta",         "dynamics.omega_mhz",
    "dynamics.omega_g_mhz", "dynamics.gamma_loss", "dynamics.gamma_conv",  "dynamics.gamma_e_mhz",
    "dynamics.delta_mhz",  "dynamics.dt",          "dynamics.t_end",       "dynamics.sigma_delta_mhz",
    "plot.mode",
};

constexpr std::string_view kFixPrefix = "fit.fix.";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

const std::vector<std::string>& known_keys() { return kKeys; }

bool is_known_key(std::string_view key) {
  if (key.starts_with(kFixPrefix)) {
    const std::string name(key.substr(kFixPrefix.size()));
    for (FitKind kind : {FitKind::single, FitKind::two_component}) {
      const auto& names = parameter_names(kind);
      if (std::find(names.begin(), names.end(), name) != names.end()) return true;
    }
    return false;
  }
  return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

double parse_double(std::string_view text, std::string_view what) {
  std::string_view s = text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("invalid number '" + std::string(text) + "' for " + std::string(what));
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("invalid integer '" + std::string(text) + "' for " + std::string(what));
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in);
}

void Config::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) throw ConfigError("unknown config key '" + key + "'");
  entries_[key] = value;
}

void Config::merge(const Config& other) {
  for (const auto& [key, value] : other.entries_) entries_[key] = value;
}

bool Config::has(const std::string& key) const { return entries_.contains(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(it->second, key);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : static_cast<int>(parse_int(it->second, key));
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::uint64_t value = 0;
  const std::string& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("invalid unsigned integer '" + s + "' for " + key);
  }
  return value;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("invalid boolean '" + it->second + "' for " + key);
}

Config preset_config(std::string_view name) {
  const SynthSpec spec = preset(name);
  const ParameterMap& p = spec.model.params;
  Config cfg;
  auto mhz = [&](const std::string& key) { return format_double(units::angular_to_mhz(p.at(key))); };
  cfg.set("model.name", std::string(to_string(spec.model.name)));
  if (spec.model.name == ModelName::two_component) {
    cfg.set("model.omega_n1_mhz", mhz("omega_n1"));
    cfg.set("model.omega_n2_mhz", mhz("omega_n2"));
    cfg.set("model.a1", format_double(p.at("a1")));
    cfg.set("model.a2", format_double(p.at("a2")));
    cfg.set("fit.kind", "double");
  } else {
    cfg.set("model.omega_n_mhz", mhz("omega_n"));
  }
  cfg.set("model.beta", format_double(p.at("beta")));
  cfg.set("model.chirp", format_double(p.at("C")));
  cfg.set("model.t0", format_double(p.at("t0")));
  cfg.set("model.sigma_delta_mhz",
          format_double(units::angular_to_mhz(units::sigma_from_alpha(p.at("alpha")))));
  cfg.set("grid.t_start", format_double(spec.t_start));
  cfg.set("grid.t_end", format_double(spec.t_end));
  cfg.set("grid.n_bins", std::to_string(spec.n_bins));
  cfg.set("synth.amplitude", format_double(spec.amplitude));
  cfg.set("synth.baseline", format_double(spec.baseline));
  for (const auto& [key, value] : spec.context) cfg.set("drive." + key, format_double(value));
  return cfg;
}

}  // namespace collrabi
