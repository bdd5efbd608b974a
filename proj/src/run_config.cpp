#include "podvms/run_config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "podvms/errors.hpp"

namespace podvms {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a number");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as an integer");
  }
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config key '" + key + "': empty list element");
    out.push_back(parse(key, item));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");

    if (key == "n_div") cfg.n_div = parse_int(key, val);
    else if (key == "snapshot_dt") cfg.snapshot_dt = parse_double(key, val);
    else if (key == "n_snapshots") cfg.n_snapshots = parse_int(key, val);
    else if (key == "nu") cfg.nu = parse_double(key, val);
    else if (key == "r") cfg.r = parse_int(key, val);
    else if (key == "R") cfg.cutoff = parse_int(key, val);
    else if (key == "alpha") cfg.alpha = parse_double(key, val);
    else if (key == "variant") cfg.variant = closure_variant_from_string(val);
    else if (key == "dt") cfg.dt = parse_double(key, val);
    else if (key == "t_final") cfg.t_final = parse_double(key, val);
    else if (key == "rank_tol") cfg.rank_tol = parse_double(key, val);
    else if (key == "sweep_dt_set") cfg.sweep_dt_set = parse_list<double>(key, val, parse_double);
    else if (key == "sweep_r_set") cfg.sweep_r_set = parse_list<int>(key, val, parse_int);
    else if (key == "sweep_r_dt") cfg.sweep_r_dt = parse_double(key, val);
    else if (key == "snapshots_path") cfg.snapshots_path = val;
    else if (key == "basis_path") cfg.basis_path = val;
    else if (key == "out_path") cfg.out_path = val;
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

void RunConfig::validate() const {
  if (n_div < 2) throw ConfigError("n_div must be at least 2");
  if (!(snapshot_dt > 0.0)) throw ConfigError("snapshot_dt must be positive");
  if (n_snapshots < 0) throw ConfigError("n_snapshots must be non-negative");
  if (snapshot_dt * n_snapshots > 1.0 + 1e-12) throw ConfigError("snapshot window exceeds the time horizon [0, 1]");
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  if (r < 1) throw ConfigError("r must be at least 1");
  if (cutoff < 0 || cutoff > r) throw ConfigError("R must lie in [0, r]");
  if (alpha < 0.0) throw ConfigError("alpha must be non-negative");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (!(rank_tol > 0.0) || rank_tol >= 1.0) throw ConfigError("rank_tol must lie in (0, 1)");
  if (!(sweep_r_dt > 0.0)) throw ConfigError("sweep_r_dt must be positive");
  for (const double d : sweep_dt_set)
    if (!(d > 0.0)) throw ConfigError("sweep_dt_set entries must be positive");
  // sweep_r_set entries are checked against r when the cutoff sweep actually
  // runs; the default set targets the benchmark order and must not invalidate
  // small-r configurations that never sweep.
  for (const int R : sweep_r_set)
    if (R < 0) throw ConfigError("sweep_r_set entries must be non-negative");
}

}  // namespace podvms
