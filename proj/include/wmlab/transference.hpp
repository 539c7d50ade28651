#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wmlab/spectral.hpp"

namespace wm {

enum class KernelKind { F, J, Jtilde };
enum class WPotential { displayed, commutator };

struct KernelOptions {
  WPotential potential = WPotential::commutator;
  // pairs with xi + eta >= ibp_min_sum and |xi/eta - 1| >= ibp_min_sep use
  // the integration-by-parts form
  double ibp_min_sum = 2.0;
  double ibp_min_sep = 0.25;
  bool tail = true;  // phase-amplitude quadrature beyond the fine core
};

struct KernelTable {
  FreqPtr freq;
  KernelKind kind = KernelKind::F;
  std::string potential;
  Eigen::MatrixXd values;     // values(i, j) = K(xi_i, eta_j)
  std::vector<double> rho;    // measure of the basis the table came from
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> ibp_used;

  // smooth weight of the diagonal region |xi/eta - 1| < 1/n
  static double diag_weight(double xi, double eta, int n);
  Eigen::MatrixXd diag_mask(int n) const;
};

double eval_W_potential(WPotential p, double R);

KernelTable build_kernel_F(const EigenbasisTable& basis, const KernelOptions& opt = {});
KernelTable build_kernel_J(const EigenbasisTable& basis);
KernelTable build_kernel_Jtilde(const EigenbasisTable& basis);

// int_{R_c}^{R_end} w(R) phi(R, xi_i) phi(R, xi_j) R dR with the oscillatory
// factor integrated exactly between nodes (R_c = last core node).
Eigen::MatrixXd tail_bilinear(const EigenbasisTable& basis, double (*w)(double));

struct K0Options {
  int refine = 1;            // sub-division of cells near the singular point
  int window = 4;            // half-width in coarse cells of the refined region
  bool measure_diagonal = true;  // K = -2 - xi rho'/rho + K0 (false: K = -2 + K0)
  double lower_tail_decades = 8.0;
};

// Discretised principal-value operator (K0 f)(xi) = p.v. int rho F f/(xi - eta) deta.
class K0Operator {
 public:
  K0Operator(const KernelTable& F, const K0Options& opt = {});
  // kernel multiplied by weight(xi, eta), e.g. a diagonal mask; the
  // measure diagonal is scaled by weight(xi, xi)
  K0Operator(const KernelTable& F, std::function<double(double, double)> weight, const K0Options& opt = {});
  const Eigen::MatrixXd& matrix() const { return m_; }
  const std::vector<double>& diagonal() const { return d_; }
  FreqPtr freq() const { return freq_; }
  SpectralCoefficients apply(const SpectralCoefficients& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const { return m_ * x; }
  // principal value part plus the measure diagonal, i.e. K + 2
  SpectralCoefficients apply_full(const SpectralCoefficients& x) const;
  Eigen::MatrixXd full_matrix() const;
  // the full operator K
  SpectralCoefficients apply_K(const SpectralCoefficients& x) const;
  const K0Options& options() const { return opt_; }

 private:
  void build(const KernelTable& F, const std::function<double(double, double)>& weight);
  FreqPtr freq_;
  K0Options opt_;
  Eigen::MatrixXd m_;
  std::vector<double> d_;
};

SpectralCoefficients apply_K0(const SpectralCoefficients& x, const KernelTable& F);
SpectralCoefficients apply_K(const SpectralCoefficients& x, const KernelTable& F);

// (K0_d, K0_nd) with quintic-smoothstep masks that sum to one
std::pair<K0Operator, K0Operator> split_diag(const KernelTable& F, int n, const K0Options& opt = {});

// xi d/dxi on the log grid (4th order, one-sided at the ends)
SpectralCoefficients xi_dxi(const SpectralCoefficients& x);

// ||F(R u') - (-2 xi d_xi + K) F(u)||_{rho} / ||F(R u')||
double transference_residual(const RadialFunction& u, const EigenbasisTable& basis, const K0Operator& K);

// Compactly supported smooth bump exp(-1/(1-y^2)), y = (R - center)/half_width
RadialFunction smooth_bump(GridPtr g, double center, double half_width);

}  // namespace wm
