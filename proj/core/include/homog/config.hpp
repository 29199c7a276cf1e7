#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "homog/coeffs.hpp"
#include "homog/lattice.hpp"

namespace homog {

/// Flat dotted-key configuration text: one `key = value` per line, `#`
/// comments, lists in brackets `[a, b, c]`. Getters throw ConfigError naming
/// the offending key.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Keys key0, key1, ... in index order, stopping at the first gap.
  std::vector<std::string> indexed(const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
  std::string origin_;
};

/// Field built from `<prefix>.family`, `<prefix>.d` and the family's
/// parameters (a0 / a_base / m0 / indexed a_term?, m_term? blocks).
CoefficientField field_from_config(const Config& cfg, const std::string& prefix);

/// Direction from `<key>` holding integer coordinates (rational) or from
/// `<key>_v` holding real coordinates (irrational).
Direction direction_from_config(const Config& cfg, const std::string& key, int d);

/// A power of two in [16, 512]; ConfigError otherwise.
int grid_from_config(const Config& cfg, const std::string& key, int fallback);

} // namespace homog
