#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmlab/propagators.hpp"

namespace wm {

enum class ProfileMode { Q_only, Q_plus_model_correction };

// Stand-in for the blow-up profile in rescaled variables. The correction
// mode adds v1 = a (R/tau^2) log(1+R^2) chi(R) with the light-cone cutoff chi.
struct ProfileModel {
  ProfileMode mode = ProfileMode::Q_only;
  double amplitude = 1.0;
  double nu = 0.25;

  double u(double tau, double R) const;
  double correction(double tau, double R) const;
};

// 1 for R <= nu tau, 0 for R >= 2 nu tau (quintic smoothstep in between)
double light_cone_cutoff(double R, double tau, double nu);
// 1 for R <= nu tau / 4, 0 for R >= nu tau / 2
double inner_cutoff(double R, double tau, double nu);

// Nonlinearity in rescaled variables, i.e. lambda^{-2} N(eps), times the light-cone cutoff.
RadialFunction assemble_N(const RadialFunction& eps, double tau, const ProfileModel& profile);

// Remainder produced by commuting D through the rescaled wave operator:
// (beta' + 2 beta^2) U eps + 2 beta U adv + beta^2 R U' eps, where adv = (d_tau + beta R d_R) eps.
// The D eps argument is accepted for interface symmetry and only checked for shape.
RadialFunction assemble_R_terms(const RadialFunction& eps, const RadialFunction& Deps, const RadialFunction& adv,
                                double tau, const Scaling& s);

// Everything the Fourier-side right-hand side needs.
struct EvolutionContext {
  const EigenbasisTable* basis = nullptr;
  const K0Operator* K0 = nullptr;
  Scaling scaling = Scaling::power(0.25);
  ProfileModel profile;
  // D_xi K0 - K0 D_xi with D_xi = xi d/dxi on the grid, built on first use
  Eigen::MatrixXd commutator;
  void prepare();
};

// Individual pieces of the nonlocal term, kept for diagnostics.
struct NonlocalParts {
  SpectralCoefficients k0_dtau;      // 2 beta K0 D_tau x
  SpectralCoefficients dbeta_k0;     // beta' K0 x
  SpectralCoefficients commutator;   // beta [D_tau, K0] x
  SpectralCoefficients k0_squared;   // beta^2 K0^2 x
  SpectralCoefficients k0_beta2;     // beta^2 K0 x
};

SpectralCoefficients assemble_nonlocal(const SpectralState& st, double tau, const EvolutionContext& ctx,
                                       NonlocalParts* parts = nullptr);

// f(tau) of -(D_tau^2 + beta D_tau + xi) x = f.
SpectralCoefficients assemble_rhs_fourier(const SpectralState& st, const ResonantState& res, double tau,
                                          const EvolutionContext& ctx, NonlocalParts* parts = nullptr);

// lim_{R->0} R^{-1} D* D eps from the coefficients: -4 int x rho dxi.
// tail_flag is set when the last tenth of the grid carries more than 1% of the integral.
double extract_h(const SpectralCoefficients& x, const EigenbasisTable& basis, bool* tail_flag = nullptr);
// the same limit taken directly on the reconstructed D eps
double extract_h_direct(const SpectralCoefficients& x, const EigenbasisTable& basis);

// lim_{R->0} R^{-1} (rescaled N(eps)) by extrapolation over the smallest nodes.
double extract_n(const RadialFunction& eps, double tau, const ProfileModel& profile);

// eps = phi0 int_0^R (D eps)/phi0 + c phi0
RadialFunction reconstruct_epsilon(const SpectralState& st, const ResonantState& res, const EigenbasisTable& basis);
// (d_tau + beta R d_R) eps from the spectral state
RadialFunction advective_epsilon(const SpectralState& st, const ResonantState& res, const RadialFunction& eps,
                                 double tau, const EvolutionContext& ctx);

struct Trajectory {
  std::vector<double> taus;
  std::vector<SpectralState> x;
  std::vector<ResonantState> c;
};

struct IterationData {
  SpectralCoefficients x0, x1;
  double c0 = 0, c1 = 0;
  double norm(double kappa) const;
};

struct EvolutionConfig {
  BlowupParameters params;
  double tau_end = 800.0;
  double tau_ratio = 1.02;
  double delta0 = 1e-3;       // admissible size of the data
  int max_iter = 12;
  double tol = 1e-9;          // relative to the data norm
  double abort_factor = 1e6;  // increments beyond this multiple of the data norm abort
  QuadratureOptions quad;
};

struct StepResult {
  Trajectory next;
  double increment = 0;
  std::vector<double> h, n;  // resonance sources of the previous iterate
};

// sup_tau (lambda/lambda0) <log(lambda/lambda0)>^{1+kappa/2} [||dx||_{S0} + tau^{-2}|dc| + tau^{-1}|dc'|]
double increment_norm(const Trajectory& a, const Trajectory& b, const Scaling& s, double kappa);

Trajectory zeroth_iterate(const IterationData& data, const std::vector<double>& taus, const Scaling& s);
StepResult iterate_step(const Trajectory& prev, const IterationData& data, const EvolutionContext& ctx,
                        const EvolutionConfig& cfg);

struct EvolutionResult {
  Trajectory trajectory;
  std::vector<double> increments;
  std::vector<double> s0_norms;        // ||x(tau)||_{S0} of the final iterate
  std::vector<double> tracking_ratio;  // s0 / [s0(tau0) (lambda0/lambda) <log>^{-1-kappa/2}]
  std::vector<double> light_cone_energy;
  std::vector<double> h, n;
  bool converged = false;
  std::string status;
  double data_norm = 0;

  nlohmann::json summary() const;
  // config.json is written by the caller; this writes trajectory and norm CSVs and report.json
  void write(const std::string& dir) const;
};

EvolutionResult run_iteration(const IterationData& data, EvolutionContext& ctx, const EvolutionConfig& cfg);

}  // namespace wm
