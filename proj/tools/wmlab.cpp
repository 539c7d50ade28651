// wmlab: command-line front end.
//   wmlab <subcommand> [--config FILE] [--seed N] [--out DIR] [--set key=value ...] [--no-cache]
// Every subcommand runs the acceptance checks that belong to it, writes its
// artifacts under --out and exits 0 iff all of those checks pass.  Invalid
// configuration exits 2 with a JSON diagnostic on stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include <CLI11.hpp>

#include "wmlab/acceptance.hpp"
#include "wmlab/cache.hpp"

namespace fs = std::filesystem;

namespace {

struct Command {
  std::string name;
  std::string help;
  std::vector<int> criteria;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> c = {
      {"eigenbasis", "build or load the eigenfunction table and check it", {2, 3}},
      {"kernel", "build or load the transference kernel and check its bounds", {4}},
      {"transfer-check", "transference identity over the seeded test family", {5}},
      {"propagate", "free and Duhamel propagator residuals, parametrix and norm decay", {6, 7, 8}},
      {"evolve", "coupled iteration on the golden data", {9, 12}},
      {"oracle-compare", "finite-difference oracle against the spectral propagator", {13, 14}},
      {"probe-phi", "K0 smallness and Phi iterate norms", {10, 11}},
      {"report", "every acceptance check", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14}},
  };
  return c;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << s;
}

int fail_config(const std::string& what) {
  std::cerr << nlohmann::json{{"error", "config"}, {"message", what}}.dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wmlab: spectral and finite-difference laboratory for the equivariant blow-up linearization"};
  app.require_subcommand(1);
  std::string config, out;
  long long seed = -1;
  std::vector<std::string> sets;
  bool no_cache = false;

  std::map<CLI::App*, const Command*> subs;
  for (const auto& c : commands()) {
    CLI::App* s = app.add_subcommand(c.name, c.help);
    s->add_option("--config", config, "flat JSON configuration file");
    s->add_option("--seed", seed, "seed of the randomised test families");
    s->add_option("--out", out, "output directory");
    s->add_option("--set", sets, "override one key, e.g. --set params.kappa=0.2");
    s->add_flag("--no-cache", no_cache, "rebuild tables instead of reading the cache");
    subs[s] = &c;
  }
  CLI::App* schema = app.add_subcommand("schema", "print the configuration schema as markdown");
  CLI11_PARSE(app, argc, argv);
  std::setvbuf(stdout, nullptr, _IOLBF, 0);

  if (schema->parsed()) {
    std::cout << wm::schema_markdown();
    return 0;
  }

  wm::RunConfig cfg;
  try {
    if (!config.empty()) cfg = wm::RunConfig::load(config);
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("config: --set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed >= 0) cfg.set("seed", nlohmann::json(seed));
    if (!out.empty()) cfg.set("out", nlohmann::json(out));
    cfg.params().validate();
  } catch (const std::exception& e) {
    return fail_config(e.what());
  }

  const Command* cmd = nullptr;
  for (auto& [s, c] : subs)
    if (s->parsed()) cmd = c;

  fs::path dir = fs::path(cfg.str("out")) / cmd->name;
  fs::create_directories(dir);
  write_text(dir / "config.json", cfg.values().dump(2) + "\n");

  wm::AcceptanceSuite suite(cfg, !no_cache);
  nlohmann::json extra;
  std::vector<wm::CriterionResult> results;
  try {
    if (cmd->name == "eigenbasis") {
      // persisted table summary; a second run with the same config is a cache hit
      wm::CacheInfo info;
      auto b = wm::load_or_build_basis(cfg.basis(), cfg.cache_dir(), &info);
      write_text(dir / "columns.csv", wm::basis_columns_csv(b));
      extra = {{"cache_hit", info.hit}, {"cache_path", info.path}, {"columns_sha256", info.checksum},
               {"n_r", b.n_r()}, {"n_xi", b.n_xi()}, {"calibration", b.calibration}};
      std::printf("eigenbasis: %s %s (columns sha256 %s)\n", info.hit ? "cache hit" : "built", info.path.c_str(),
                  info.checksum.substr(0, 16).c_str());
    } else if (cmd->name == "kernel") {
      wm::CacheInfo info;
      wm::KernelOptions ko;
      ko.potential = cfg.str("kernel.potential") == "displayed" ? wm::WPotential::displayed : wm::WPotential::commutator;
      wm::load_or_build_kernel(suite.basis(), ko, cfg.cache_dir(), &info);
      extra = {{"cache_hit", info.hit}, {"cache_path", info.path}, {"values_sha256", info.checksum}};
      std::printf("kernel: %s %s\n", info.hit ? "cache hit" : "built", info.path.c_str());
    }
    for (int id : cmd->criteria) {
      results.push_back(suite.run(id));
      const auto& r = results.back();
      std::printf("%s (%.1fs)\n", wm::criterion_line(r).c_str(), r.seconds);
      if (r.metrics.contains("csv")) write_text(dir / ("criterion" + std::to_string(id) + ".csv"), r.metrics["csv"]);
    }
    if (cmd->name == "evolve") suite.golden_run().write((dir / "evolution").string());
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "run"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  }

  nlohmann::json j = wm::suite_json(results, cfg);
  j["command"] = cmd->name;
  if (!extra.is_null()) j["artifact"] = extra;
  write_text(dir / "report.json", j.dump(2) + "\n");
  int passed = 0;
  std::string text;
  for (const auto& r : results) {
    passed += r.pass;
    text += wm::criterion_line(r) + "\n";
  }
  text += std::to_string(passed) + " of " + std::to_string(results.size()) + " checks pass\n";
  write_text(dir / "report.txt", text);
  std::printf("%d of %zu checks pass; report in %s\n", passed, results.size(), dir.string().c_str());
  return passed == int(results.size()) ? 0 : 1;
}
