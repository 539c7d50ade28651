#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmlab/config.hpp"
#include "wmlab/evolution.hpp"
#include "wmlab/oracle.hpp"
#include "wmlab/transference.hpp"

namespace wm {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // one-line summary of the measured values
  nlohmann::json metrics;
  double seconds = 0;
};

// Seeded Gaussian bumps in log xi: exp(-((log xi - log c) / w)^2).
SpectralCoefficients log_gaussian(FreqPtr g, double center, double width, double height = 1.0);

// Golden data of the coupled iteration: a log-Gaussian x0 scaled to S0 norm delta0, x1 = 0, c = 0.
IterationData golden_data(FreqPtr g, const RunConfig& cfg);

// Runs the acceptance checks, building the shared tables on first use.
class AcceptanceSuite {
 public:
  explicit AcceptanceSuite(RunConfig cfg, bool use_cache = true);

  static const std::vector<std::string>& titles();  // index 0 is criterion 1
  CriterionResult run(int id);
  std::vector<CriterionResult> run_all(const std::vector<int>& ids = {});

  const EigenbasisTable& basis();
  const KernelTable& kernel();
  const K0Operator& K0();
  const EigenbasisTable& evolution_basis();
  const K0Operator& evolution_K0();
  const EvolutionResult& golden_run();

 private:
  CriterionResult c1();
  CriterionResult c2();
  CriterionResult c3();
  CriterionResult c4();
  CriterionResult c5();
  CriterionResult c6();
  CriterionResult c7();
  CriterionResult c8();
  CriterionResult c9();
  CriterionResult c10();
  CriterionResult c11();
  CriterionResult c12();
  CriterionResult c13();
  CriterionResult c14();

  RunConfig cfg_;
  bool use_cache_;
  std::unique_ptr<EigenbasisTable> basis_, evo_basis_;
  std::unique_ptr<KernelTable> kernel_, evo_kernel_;
  std::unique_ptr<K0Operator> K0_, evo_K0_;
  std::unique_ptr<EvolutionResult> golden_;
};

// "[PASS] 3 Spectral measure: ..." style line
std::string criterion_line(const CriterionResult& r);
nlohmann::json suite_json(const std::vector<CriterionResult>& rs, const RunConfig& cfg);

// Golden numbers of the coupled iteration recorded on the first verified run.
struct GoldenNumbers {
  double data_norm;
  std::vector<double> increments;  // first iterates
};
const GoldenNumbers& golden_numbers();

}  // namespace wm
