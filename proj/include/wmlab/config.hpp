#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmlab/evolution.hpp"
#include "wmlab/oracle.hpp"
#include "wmlab/profile.hpp"
#include "wmlab/spectral.hpp"

namespace wm {

// One entry of the flat configuration schema. Keys are namespaced by module,
// e.g. "params.kappa" or "basis.n_xi".
struct ConfigKey {
  std::string key;
  std::string type;  // "number", "integer", "string"
  nlohmann::json default_value;
  double lo = -INFINITY, hi = INFINITY;
  bool lo_open = false, hi_open = false;
  std::string bound;  // human readable, e.g. "(0, 1/2)"
  std::string doc;
  std::vector<std::string> choices;  // allowed values of a string key (empty: any)
};

const std::vector<ConfigKey>& config_schema();
// schema rendered as a markdown table (used by the README and `wmlab schema`)
std::string schema_markdown();

class RunConfig {
 public:
  RunConfig();  // all defaults
  // Validates and fills defaults; throws std::invalid_argument naming the field.
  static RunConfig from_json(const nlohmann::json& flat);
  static RunConfig load(const std::string& path);

  // Sets one key from a string (flag override) and revalidates it.
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const nlohmann::json& value);

  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  std::string str(const std::string& key) const;
  const nlohmann::json& values() const { return v_; }

  uint64_t seed() const { return uint64_t(integer("seed")); }
  BlowupParameters params() const;
  BasisConfig basis() const;             // acceptance/test basis
  BasisConfig evolution_basis() const;   // extended frequency range used by the coupled iteration
  EvolutionConfig evolution() const;
  ProbeOptions probe() const;
  OracleCompareOptions oracle(bool static_background) const;
  // directory of the cache: WMLAB_CACHE if set, else the "cache" key
  std::string cache_dir() const;

 private:
  nlohmann::json v_;
};

}  // namespace wm
