#include "wmlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wm {

namespace {

ConfigKey num(std::string k, double def, double lo, double hi, bool lo_open, bool hi_open, std::string bound,
              std::string doc) {
  return {std::move(k), "number", def, lo, hi, lo_open, hi_open, std::move(bound), std::move(doc)};
}
ConfigKey integer(std::string k, long def, double lo, double hi, std::string bound, std::string doc) {
  return {std::move(k), "integer", def, lo, hi, false, false, std::move(bound), std::move(doc)};
}
ConfigKey text(std::string k, std::string def, std::string doc, std::vector<std::string> choices = {}) {
  std::string bound;
  for (const auto& c : choices) bound += (bound.empty() ? "{" : ", ") + c;
  if (!bound.empty()) bound += "}";
  return {std::move(k), "string", def, -INFINITY, INFINITY, false, false, bound, std::move(doc), std::move(choices)};
}

const ConfigKey& find_key(const std::string& key) {
  for (const auto& k : config_schema())
    if (k.key == key) return k;
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string fmt(const nlohmann::json& v) {
  std::ostringstream os;
  if (v.is_number_float()) os << v.get<double>();
  else os << v.dump();
  return os.str();
}

nlohmann::json check(const ConfigKey& k, const nlohmann::json& v) {
  if (k.type == "string") {
    if (!v.is_string()) throw std::invalid_argument("config: " + k.key + " must be a string");
    if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), v.get<std::string>()) == k.choices.end())
      throw std::invalid_argument("config: " + k.key + " = " + v.dump() + " is outside " + k.bound);
    return v;
  }
  if (!v.is_number()) throw std::invalid_argument("config: " + k.key + " must be a number");
  double x = v.get<double>();
  if (k.type == "integer" && (x != std::floor(x)))
    throw std::invalid_argument("config: " + k.key + " = " + fmt(v) + " must be an integer");
  bool ok = std::isfinite(x) && (k.lo_open ? x > k.lo : x >= k.lo) && (k.hi_open ? x < k.hi : x <= k.hi);
  if (!ok) throw std::invalid_argument("config: " + k.key + " = " + fmt(v) + " is outside " + k.bound);
  return k.type == "integer" ? nlohmann::json(long(x)) : nlohmann::json(x);
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> s = {
      num("params.nu", 0.25, 0, 0.5, true, false, "(0, 1/2]", "blow-up rate exponent, lambda(t) = t^{-1-nu}"),
      num("params.kappa", 0.1, 0, 0.5, true, true, "(0, 1/2)", "weight exponent of the S0/S1 norms"),
      num("params.tau0", 100, 1, 1e6, false, false, "[1, 1e6]", "initial rescaled time of the coupled iteration"),
      integer("params.n_diag", 4, 2, 64, "[2, 64]", "diagonal width 1/n of the K0 split"),
      integer("seed", 20240601, 0, 9.0e15, "[0, 9e15]", "seed of every randomised test family"),
      text("out", "out", "output directory"),
      text("cache", ".wmlab_cache", "cache directory (WMLAB_CACHE overrides)"),
      // radial grid and basis used by the acceptance checks and most subcommands
      num("grid.r_min", 1e-4, 0, 1, true, false, "(0, 1]", "first radial node"),
      num("grid.r_core", 8, 1, 100, false, false, "[1, 100]", "end of the fine core"),
      num("grid.r_max", 400, 10, 1e4, false, false, "[10, 1e4]", "outer radius"),
      integer("grid.n_core", 24576, 64, 1e6, "[64, 1e6]", "nodes of the core map"),
      num("grid.tail_ratio", 1.02, 1, 1.2, false, false, "[1, 1.2]", "geometric tail ratio (1 disables the tail)"),
      num("basis.xi_min", 1e-3, 1e-14, 1, false, false, "[1e-14, 1]", "smallest frequency"),
      num("basis.xi_max", 1e3, 1, 1e5, false, false, "[1, 1e5]", "largest frequency"),
      integer("basis.n_xi", 512, 16, 8192, "[16, 8192]", "frequency nodes"),
      text("kernel.potential", "commutator", "kernel potential", {"commutator", "displayed"}),
      // coupled iteration
      integer("evolve.grid.n_core", 4096, 64, 1e6, "[64, 1e6]", "core nodes of the evolution basis grid"),
      num("evolve.grid.r_max", 450, 10, 1e4, false, false, "[10, 1e4]", "outer radius of the evolution basis grid"),
      num("evolve.basis.xi_min", 1e-12, 1e-14, 1, false, false, "[1e-14, 1]", "smallest frequency of the evolution basis"),
      num("evolve.basis.xi_max", 1e3, 1, 1e5, false, false, "[1, 1e5]", "largest frequency of the evolution basis"),
      integer("evolve.basis.n_xi", 900, 16, 8192, "[16, 8192]", "frequency nodes of the evolution basis"),
      num("evolve.tau_end_factor", 8, 1, 64, true, false, "(1, 64]", "tau_end = factor * tau0"),
      num("evolve.tau_ratio", 1.02, 1, 1.5, true, false, "(1, 1.5]", "ratio of consecutive tau nodes"),
      num("evolve.delta0", 1e-3, 0, 1, true, false, "(0, 1]", "admissible data size"),
      integer("evolve.max_iter", 12, 1, 200, "[1, 200]", "iteration cap"),
      num("evolve.tol", 1e-9, 0, 1, true, false, "(0, 1]", "increment tolerance relative to the data norm"),
      num("evolve.data_width", 1.5, 0.1, 10, false, false, "[0.1, 10]", "width in log xi of the golden Gaussian data"),
      num("evolve.data_center", 1.0, 1e-3, 1e2, false, false, "[1e-3, 1e2]", "centre frequency of the golden data"),
      // Phi iterates
      num("phi.tau0", 1000, 1, 1e6, false, false, "[1, 1e6]", "initial time of the Phi iterate study"),
      num("phi.tau_end_factor", 8, 1, 64, true, false, "(1, 64]", "end time factor of the Phi iterate study"),
      integer("phi.iterates", 8, 1, 64, "[1, 64]", "number of Phi applications"),
      // finite-difference oracle
      num("oracle.t0", 40, 1, 1e4, false, false, "[1, 1e4]", "initial time of the slow-background comparison"),
      integer("oracle.n_r", 4000, 100, 1e6, "[100, 1e6]", "fd nodes of the comparison"),
      num("oracle.r_max", 40, 5, 1e3, false, false, "[5, 1e3]", "fd outer radius of the comparison"),
      num("probe.t0", 0.1, 1e-4, 10, false, false, "[1e-4, 10]", "initial physical time of the stability probe"),
      num("probe.delta0", 1e-3, 0, 1e-2, false, false, "[0, 1e-2]", "perturbation height of the stability probe"),
      integer("probe.n_r", 3000, 100, 1e6, "[100, 1e6]", "fd nodes of the stability probe"),
      num("probe.r_max", 0.6, 1e-3, 1e3, false, false, "[1e-3, 1e3]", "fd outer radius of the stability probe"),
  };
  return s;
}

std::string schema_markdown() {
  std::ostringstream os;
  os << "| key | type | default | bound | meaning |\n|---|---|---|---|---|\n";
  for (const auto& k : config_schema())
    os << "| `" << k.key << "` | " << k.type << " | " << fmt(k.default_value) << " | " << k.bound << " | " << k.doc
       << " |\n";
  return os.str();
}

RunConfig::RunConfig() {
  for (const auto& k : config_schema()) v_[k.key] = k.default_value;
}

RunConfig RunConfig::from_json(const nlohmann::json& flat) {
  if (!flat.is_object()) throw std::invalid_argument("config: top level must be an object of flat keys");
  RunConfig c;
  for (auto it = flat.begin(); it != flat.end(); ++it) c.set(it.key(), it.value());
  c.params().validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void RunConfig::set(const std::string& key, const nlohmann::json& value) {
  const ConfigKey& k = find_key(key);
  v_[key] = check(k, value);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const ConfigKey& k = find_key(key);
  if (k.type == "string") return set(key, nlohmann::json(value));
  nlohmann::json v;
  try {
    v = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("config: " + key + " = '" + value + "' is not a number");
  }
  set(key, v);
}

double RunConfig::num(const std::string& key) const { return v_.at(key).get<double>(); }
long RunConfig::integer(const std::string& key) const { return v_.at(key).get<long>(); }
std::string RunConfig::str(const std::string& key) const { return v_.at(key).get<std::string>(); }

BlowupParameters RunConfig::params() const {
  BlowupParameters p;
  p.nu = num("params.nu");
  p.kappa = num("params.kappa");
  p.tau0 = num("params.tau0");
  p.n_diag = int(integer("params.n_diag"));
  return p;
}

BasisConfig RunConfig::basis() const {
  BasisConfig b;
  b.grid.r_min = num("grid.r_min");
  b.grid.r_core = num("grid.r_core");
  b.grid.r_max = num("grid.r_max");
  b.grid.n_core = int(integer("grid.n_core"));
  b.grid.tail_ratio = num("grid.tail_ratio");
  b.xi_min = num("basis.xi_min");
  b.xi_max = num("basis.xi_max");
  b.n_xi = int(integer("basis.n_xi"));
  return b;
}

BasisConfig RunConfig::evolution_basis() const {
  BasisConfig b = basis();
  b.grid.n_core = int(integer("evolve.grid.n_core"));
  b.grid.r_max = num("evolve.grid.r_max");
  b.xi_min = num("evolve.basis.xi_min");
  b.xi_max = num("evolve.basis.xi_max");
  b.n_xi = int(integer("evolve.basis.n_xi"));
  return b;
}

EvolutionConfig RunConfig::evolution() const {
  EvolutionConfig e;
  e.params = params();
  e.tau_end = e.params.tau0 * num("evolve.tau_end_factor");
  e.tau_ratio = num("evolve.tau_ratio");
  e.delta0 = num("evolve.delta0");
  e.max_iter = int(integer("evolve.max_iter"));
  e.tol = num("evolve.tol");
  return e;
}

ProbeOptions RunConfig::probe() const {
  ProbeOptions p;
  p.nu = num("params.nu");
  p.t0 = num("probe.t0");
  p.delta0 = num("probe.delta0");
  p.n_r = size_t(integer("probe.n_r"));
  p.r_max = num("probe.r_max");
  return p;
}

OracleCompareOptions RunConfig::oracle(bool static_background) const {
  OracleCompareOptions o;
  o.static_background = static_background;
  o.nu = num("params.nu");
  o.t0 = num("oracle.t0");
  o.n_r = size_t(integer("oracle.n_r"));
  o.r_max = num("oracle.r_max");
  return o;
}

std::string RunConfig::cache_dir() const {
  if (const char* e = std::getenv("WMLAB_CACHE"); e && *e) return e;
  return str("cache");
}

}  // namespace wm
