#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wmlab/profile.hpp"
#include "wmlab/spectral.hpp"
#include "wmlab/transference.hpp"

namespace wm {

struct SpectralState {
  double tau = 0;
  SpectralCoefficients x, dtau_x;
};

struct ResonantState {
  double tau = 0;
  double c = 0, c_prime = 0;
};

// D_tau x = d_tau x - 2 beta xi d_xi x - beta x at slice k of a history
// sampled at taus (three-point difference, one-sided at the ends).
SpectralCoefficients apply_Dtau(const std::vector<SpectralCoefficients>& history, const std::vector<double>& taus,
                                size_t k, const Scaling& s);

// Closed-form free wave with x(tau0) = x0, D_tau x(tau0) = x1.
SpectralState free_evolve(const SpectralCoefficients& x0, const SpectralCoefficients& x1, double tau0, double tau,
                          const Scaling& s);
// The same closed form at arbitrary frequencies.
void free_evolve_at(const SpectralCoefficients& x0, const SpectralCoefficients& x1, double tau0, double tau,
                    const std::vector<double>& xi, const Scaling& s, std::vector<double>& x, std::vector<double>& dx);

// Source f(sigma, zeta) of the Fourier-side equation.
using SourceFn = std::function<double(double, double)>;

// Source given by slices on tau nodes: linear in sigma between slices,
// cubic in log zeta with power-law extrapolation outside the grid.
SourceFn family_source(const std::vector<double>& taus, const std::vector<SpectralCoefficients>& slices);

struct QuadratureOptions {
  // sub-steps per sigma interval are chosen so the phase moves at most
  // max_phase_step per sub-step, capped at max_substeps
  double max_phase_step = M_PI / 4;
  int max_substeps = 8;
};

// I_sin(xi) = int_{tau0}^{tau} sin(Theta) f(sigma, zeta) dsigma and I_cos likewise, with
// Theta = lambda(tau) sqrt(xi) int_sigma^tau lambda^{-1} and zeta = lambda(tau)^2 xi / lambda(sigma)^2.
// sigma_nodes start at tau0; nodes beyond tau are ignored and tau closes the last interval.
void oscillatory_integrals(const SourceFn& f, const std::vector<double>& sigma_nodes, double tau,
                           const std::vector<double>& xi, const Scaling& s, const QuadratureOptions& q,
                           std::vector<double>* i_sin, std::vector<double>* i_cos);

// Solution of -(D_tau^2 + beta D_tau + xi) x = f with zero data at sigma_nodes[0].
SpectralState duhamel(const SourceFn& f, const std::vector<double>& sigma_nodes, double tau, FreqPtr grid,
                      const Scaling& s, const QuadratureOptions& q = {});
void duhamel_at(const SourceFn& f, const std::vector<double>& sigma_nodes, double tau, const std::vector<double>& xi,
                const Scaling& s, const QuadratureOptions& q, std::vector<double>& x, std::vector<double>& dx);
// Duhamel solution at every node of taus for a sampled source.
std::vector<SpectralState> duhamel_trajectory(const std::vector<double>& taus,
                                              const std::vector<SpectralCoefficients>& f, const Scaling& s,
                                              const QuadratureOptions& q = {});

// Residual of (D_tau^2 + beta D_tau + xi) x + f at (tau, xi) evaluated along the
// characteristic xi' = xi lambda(tau)^2 / lambda(tau')^2, where x is smooth.
// x_at(tau', xi') returns x. Relative to |f| + |xi x| scale supplied by the caller.
double characteristic_residual(const std::function<double(double, double)>& x_at, double tau, double xi,
                               double f_value, const Scaling& s, double dtau);

// Resonance equation L_c y = r with L_c = (d + beta)^2 + beta (d + beta),
// beta = (1 + 1/nu)/tau, zero data at tau0.
struct ParametrixValue {
  double y = 0, dy = 0;
};
// callable r, adaptive Gauss-Kronrod
ParametrixValue c_parametrix(const std::function<double(double)>& r, double tau0, double tau, double nu);
// sampled r on increasing nodes (piecewise quadratic cumulative quadrature)
std::vector<ParametrixValue> c_parametrix(const std::vector<double>& taus, const std::vector<double>& r, double nu);

// exponents of the two homogeneous solutions of L_c: -b and 1 - 2b, b = 1 + 1/nu
std::pair<double, double> c_fundamental_exponents(double nu);

// c with c(tau0) = c0, c'(tau0) = c1 solving L_c c + h + lambda^{-2} n = 0.
std::vector<ResonantState> c_evolve(double c0, double c1, const std::vector<double>& taus,
                                    const std::vector<double>& h, const std::vector<double>& n, const Scaling& s);
ResonantState c_evolve(double c0, double c1, const std::function<double(double)>& h,
                       const std::function<double(double)>& n, double tau0, double tau, const Scaling& s);

// Phi(f)(tau, xi) = int cos(Theta) beta(sigma) (K0 f)(sigma, zeta) dsigma on every node of taus.
std::vector<SpectralCoefficients> apply_Phi(const std::vector<double>& taus,
                                            const std::vector<SpectralCoefficients>& f, const K0Operator& K0,
                                            const Scaling& s, const QuadratureOptions& q = {});

// sup_n (lambda_n/lambda_0) <log(lambda_n/lambda_0)>^{1+kappa/2} ||g_n||_{S1}
double phi_weighted_norm(const std::vector<double>& taus, const std::vector<SpectralCoefficients>& g,
                         const Scaling& s, double kappa);

struct PhiIterateReport {
  std::vector<double> norms;       // full Phi, index j = iterate (0 = input)
  std::vector<double> diag_norms;  // diagonal-only Phi_1
  std::vector<double> ratios() const;
  std::vector<double> diag_ratios() const;
  std::string to_csv() const;  // iterate,norm,ratio,diag_norm,diag_ratio
};

PhiIterateReport iterate_Phi(const std::vector<double>& taus, const std::vector<SpectralCoefficients>& f, int k,
                             const K0Operator& K0_full, const K0Operator& K0_diag, const Scaling& s, double kappa,
                             const QuadratureOptions& q = {});

// geometric tau nodes tau0 * ratio^k up to and including tau_end
std::vector<double> geometric_taus(double tau0, double tau_end, double ratio = 1.02);

}  // namespace wm
