#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace collrabi {

// Flat `key = value` configuration. Keys are namespaced (model.*, grid.*,
// synth.*, fit.*, peaks.*, dynamics.*, drive.*); unknown keys are rejected.
// Frequencies with an _mhz suffix are cyclic MHz. Numbers always use '.'.
class Config {
 public:
  // Lines are `key = value`; '#' starts a comment; blank lines are skipped.
  static Config parse(std::istream& in);
  static Config load(const std::string& path);

  // Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  // Later values win.
  void merge(const Config& other);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

bool is_known_key(std::string_view key);
const std::vector<std::string>& known_keys();

// Locale-independent number parsing; the whole string must be consumed.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

// Shortest round-trip decimal form.
std::string format_double(double value);

// Config entries equivalent to a datagen preset.
Config preset_config(std::string_view name);

}  // namespace collrabi
