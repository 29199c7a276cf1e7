#include "homog/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigError("key `" + key + "`: expected a bracketed list, got \"" + raw + "\"");
  v = v.substr(1, v.size() - 2);
  std::vector<std::string> parts;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const std::string t = trim(v);
  const long long x = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError("key `" + key + "`: expected integer, got \"" + v + "\"");
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const std::string t = trim(v);
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError("key `" + key + "`: expected number, got \"" + v + "\"");
  return x;
}

} // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.kv_[key] = val;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream all;
  all << in.rdbuf();
  return parse_string(all.str(), path);
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing key `" + key + "`");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
  return parse_int(key, get_string(key));
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_int(key, it->second);
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_double(key, it->second);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string v = trim(it->second);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key `" + key + "`: expected boolean, got \"" + v + "\"");
}

std::vector<std::int64_t> Config::get_int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const std::string& p : split_list(key, get_string(key))) out.push_back(parse_int(key, p));
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& p : split_list(key, get_string(key)))
    out.push_back(parse_double(key, p));
  return out;
}

std::vector<std::string> Config::indexed(const std::string& prefix) const {
  std::vector<std::string> out;
  for (int i = 0;; ++i) {
    const std::string name = prefix + std::to_string(i);
    bool found = false;
    for (const auto& [k, v] : kv_) {
      (void)v;
      if (k == name || k.rfind(name + ".", 0) == 0) {
        found = true;
        break;
      }
    }
    if (!found) break;
    out.push_back(name);
  }
  return out;
}

namespace {

Mat mat_from_list(const std::string& key, const std::vector<double>& vals, int d) {
  if (static_cast<int>(vals.size()) != d * d)
    throw ConfigError("key `" + key + "`: expected " + std::to_string(d * d) + " entries");
  Mat m{};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) at(m, i, j) = vals[static_cast<std::size_t>(i) * d + j];
  return m;
}

IVec ivec_from_list(const std::string& key, const std::vector<std::int64_t>& vals, int d) {
  if (static_cast<int>(vals.size()) != d)
    throw ConfigError("key `" + key + "`: expected " + std::to_string(d) + " entries");
  IVec k{};
  for (int i = 0; i < d; ++i) k[i] = vals[static_cast<std::size_t>(i)];
  return k;
}

Vec vec_from_list(const std::string& key, const std::vector<double>& vals, int d) {
  if (static_cast<int>(vals.size()) != d)
    throw ConfigError("key `" + key + "`: expected " + std::to_string(d) + " entries");
  Vec v{};
  for (int i = 0; i < d; ++i) v[i] = vals[static_cast<std::size_t>(i)];
  return v;
}

} // namespace

CoefficientField field_from_config(const Config& cfg, const std::string& prefix) {
  const std::string family = cfg.get_string(prefix + ".family");
  const int d = static_cast<int>(cfg.get_int(prefix + ".d"));
  if (d != 2 && d != 3) throw ConfigError("key `" + prefix + ".d`: must be 2 or 3");

  FieldParams p;
  if (cfg.has(prefix + ".a0")) {
    p.has_a0 = true;
    p.a0 = mat_from_list(prefix + ".a0", cfg.get_double_list(prefix + ".a0"), d);
  }
  p.a_base = cfg.get_double(prefix + ".a_base", 1.0);
  for (const std::string& block : cfg.indexed(prefix + ".a_term")) {
    const IVec k = ivec_from_list(block + ".k", cfg.get_int_list(block + ".k"), d);
    const double amp = cfg.get_double(block + ".amp");
    const double phase = cfg.get_double(block + ".phase", 0.0);
    if (cfg.has(block + ".mat") || cfg.has(block + ".dir")) {
      TrigTerm t;
      t.k = k;
      t.amp = amp;
      t.phase = phase;
      if (cfg.has(block + ".mat")) {
        t.mat = mat_from_list(block + ".mat", cfg.get_double_list(block + ".mat"), d);
      } else {
        const Vec dir = vec_from_list(block + ".dir", cfg.get_double_list(block + ".dir"), d);
        t.mat = outer(d, dir, dir);
      }
      p.a_terms.push_back(t);
    } else {
      ScalarTerm t;
      t.k = k;
      t.amp = amp;
      t.phase = phase;
      p.a_scalar_terms.push_back(t);
    }
  }
  p.m0 = cfg.get_double(prefix + ".m0", 1.0);
  for (const std::string& block : cfg.indexed(prefix + ".m_term")) {
    ScalarTerm t;
    t.k = ivec_from_list(block + ".k", cfg.get_int_list(block + ".k"), d);
    t.amp = cfg.get_double(block + ".amp");
    t.phase = cfg.get_double(block + ".phase", 0.0);
    p.m_terms.push_back(t);
  }
  if (cfg.has(prefix + ".m_edir")) {
    p.m_edir = vec_from_list(prefix + ".m_edir", cfg.get_double_list(prefix + ".m_edir"), d);
    p.m_ecoef = cfg.get_double(prefix + ".m_ecoef", 0.0);
  }
  try {
    return builtin_field(family, d, p);
  } catch (const UnknownFamily&) {
    throw ConfigError("key `" + prefix + ".family`: unknown family \"" + family + "\"");
  }
}

Direction direction_from_config(const Config& cfg, const std::string& key, int d) {
  if (cfg.has(key + "_v")) {
    const Vec v = vec_from_list(key + "_v", cfg.get_double_list(key + "_v"), d);
    return irrational_direction(d, v);
  }
  if (!cfg.has(key)) throw ConfigError("missing key `" + key + "`");
  const IVec k = ivec_from_list(key, cfg.get_int_list(key), d);
  return primitive_direction(d, k);
}

int grid_from_config(const Config& cfg, const std::string& key, int fallback) {
  const int n = static_cast<int>(cfg.get_int(key, fallback));
  if (n < 16 || n > 512 || (n & (n - 1)) != 0)
    throw ConfigError("key `" + key + "`: grid must be a power of two in [16, 512]");
  return n;
}

} // namespace homog
