#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wmlab/grid.hpp"

namespace wm {

// Log-spaced frequency nodes with trapezoid-in-log weights for int . dxi.
struct FrequencyGrid {
  std::vector<double> xi, w, logxi;
  double h = 0;  // spacing in log xi

  static std::shared_ptr<const FrequencyGrid> log_spaced(double lo, double hi, int n);
  size_t size() const { return xi.size(); }
};

using FreqPtr = std::shared_ptr<const FrequencyGrid>;

struct SpectralCoefficients {
  FreqPtr grid;
  std::vector<double> values;
  // Optional power-law exponents used when a rescaled argument leaves the
  // grid; NaN means "not declared".
  double upper_exponent = std::numeric_limits<double>::quiet_NaN();
  double lower_exponent = std::numeric_limits<double>::quiet_NaN();

  SpectralCoefficients() = default;
  SpectralCoefficients(FreqPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {}
  static SpectralCoefficients zeros(FreqPtr g) { return SpectralCoefficients(g, std::vector<double>(g->size(), 0.0)); }

  size_t size() const { return values.size(); }
  SpectralCoefficients& operator+=(const SpectralCoefficients& o);
  SpectralCoefficients& operator*=(double s);
};

SpectralCoefficients operator+(SpectralCoefficients a, const SpectralCoefficients& b);
SpectralCoefficients operator-(SpectralCoefficients a, const SpectralCoefficients& b);
SpectralCoefficients operator*(double s, SpectralCoefficients a);

// Cubic interpolation in log xi with power-law extrapolation past the ends.
class LogInterp {
 public:
  // Fits endpoint exponents from the data unless the coefficients declare them.
  explicit LogInterp(const SpectralCoefficients& x);
  double operator()(double zeta) const;
  double upper_exponent() const { return pu_; }
  // true if zeta can be evaluated (inside the grid, within one decade of it,
  // or further out with a decaying declared/fitted tail)
  bool admissible(double zeta) const;

 private:
  const FrequencyGrid* g_;
  const std::vector<double>* v_;
  double pu_, pl_;
  bool declared_;
};

// Least-squares power law of |x| over the last m nodes (top) or first m (bottom).
double fit_upper_exponent(const SpectralCoefficients& x, int m = 12);
double fit_lower_exponent(const SpectralCoefficients& x, int m = 12);

struct BasisConfig {
  GridSpec grid;
  double xi_min = 1e-3;
  double xi_max = 1e3;
  int n_xi = 512;
  double prufer_switch = 50.0;  // value of R sqrt(xi) where the phase-amplitude form takes over
  double amp_radius = 200.0;    // amplitude fit no earlier than R sqrt(xi) = amp_radius
  double rtol = 1e-12;

  nlohmann::json to_json() const;
  static BasisConfig from_json(const nlohmann::json& j);
};

struct EigenColumn {
  double xi = 0;
  std::vector<double> phi, dphi;
  double c2 = 1;       // launch normalisation phi ~ c2 R^2
  double amp = 0;      // phi ~ amp R^{-1/2} sin(R sqrt(xi) + theta) for large R
  double theta = 0;
  size_t series_terms = 0;
  size_t ode_steps = 0;
};

// Regular solution of L~ phi = xi phi normalised by phi = R^2 + O(R^4).
EigenColumn build_eigenfunction(double xi, const RadialGrid& grid, const BasisConfig& cfg);

struct EigenbasisTable {
  BasisConfig config;
  GridPtr grid;
  FreqPtr freq;
  Eigen::MatrixXd phi, dphi;   // rows: R nodes, columns: xi nodes
  std::vector<double> c2, amp, theta, a_abs;
  std::vector<double> rho_weyl;  // 1/(pi sqrt(xi) amp^2)
  std::vector<double> rho;       // calibrated measure
  double calibration = 1.0;
  double calibration_residual = 0.0;
  bool calibration_flag = false;  // |calibration - 1| > 5%

  size_t n_r() const { return size_t(phi.rows()); }
  size_t n_xi() const { return size_t(phi.cols()); }
  // columns D* phi(., xi) from the stored phi, phi'
  Eigen::MatrixXd dstar_phi() const;
};

// Builds every column and the amplitude-formula measure (uncalibrated).
EigenbasisTable build_basis(const BasisConfig& cfg);

// Standard calibration set: R^2-weighted Gaussian bumps on several scales.
std::vector<RadialFunction> default_calibration_set(GridPtr g);
RadialFunction heldout_gaussian(GridPtr g);

// Fixes the global constant of rho by least squares on Parseval over the set.
// Throws std::runtime_error if the post-fit residual exceeds 5%.
void build_measure(EigenbasisTable& basis, const std::vector<RadialFunction>& calibration_set);

SpectralCoefficients forward_transform(const RadialFunction& f, const EigenbasisTable& basis);
RadialFunction inverse_transform(const SpectralCoefficients& x, const EigenbasisTable& basis);
// batched versions (columns are functions / coefficient vectors)
Eigen::MatrixXd forward_transform(const Eigen::MatrixXd& f, const EigenbasisTable& basis);
Eigen::MatrixXd inverse_transform_matrix(const Eigen::MatrixXd& x, const EigenbasisTable& basis);

double l2_rho(const SpectralCoefficients& x, const EigenbasisTable& basis);
double parseval_defect(const RadialFunction& f, const EigenbasisTable& basis);

double s0_norm(const SpectralCoefficients& x, double kappa);
double s1_norm(const SpectralCoefficients& x, double kappa);
// <xi>^{2+kappa} xi^{1/2} <log xi>^{-1-kappa}
double s0_weight(double xi, double kappa);

struct SupCheck {
  double lhs = 0, rhs = 0;
};
SupCheck weighted_sup_check(const SpectralCoefficients& x, const EigenbasisTable& basis, double kappa);

// max over xi of ||L~ phi - xi phi|| / ||phi|| on nodes below fraction*N
struct ResidualReport {
  double max_residual = 0;
  double xi_at_max = 0;
  std::vector<double> per_xi;
};
ResidualReport eigen_residuals(const EigenbasisTable& basis, double fraction = 0.9);

}  // namespace wm
