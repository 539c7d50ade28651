#pragma once

#include <string>

#include "wmlab/grid.hpp"

namespace wm {

struct BlowupParameters {
  double nu = 0.25;
  double tau0 = 100.0;
  double kappa = 0.1;
  int n_diag = 4;

  // throws std::invalid_argument naming the offending field
  void validate() const;
};

// Harmonic map profile and the potentials built from it.
double eval_Q(double R);
double eval_phi0(double R);
double eval_W(double R);          // 16/(R^2+1)^2 - 32/(1+R^2)^3
double eval_W_commutator(double R);  // potential of [L~, R d/dR] - 2 L~, i.e. 8/(1+R^2)^2
double eval_U(double R);          // -4R/(R^2+1)^2
double potential_L(double R);     // (1 - 6R^2 + R^4) / (R^2 (1+R^2)^2)
double potential_Ltilde(double R);  // 4 / (R^2 (1+R^2))

// First order operators and their compositions. Values at the two
// smallest nodes use the leading power declared by origin_order.
RadialFunction apply_D(const RadialFunction& f);
RadialFunction apply_Dstar(const RadialFunction& f);
RadialFunction apply_L(const RadialFunction& f);
RadialFunction apply_Ltilde(const RadialFunction& f);
// -f'' - f'/R + V f with the potentials above
RadialFunction apply_L_potential(const RadialFunction& f);
RadialFunction apply_Ltilde_potential(const RadialFunction& f);

// phi0(R) int_0^R g(s)/phi0(s) ds, the right inverse of D
RadialFunction right_inverse_phi(const RadialFunction& g);

// int [ (u_r^2 + u_t^2)/2 + sin^2 u / (2 r^2) ] r dr
double energy(const RadialFunction& u, const RadialFunction& ut);
double local_energy(const RadialFunction& e, const RadialFunction& et, double radius);

// lambda(t) = t^{-1-nu}, tau = t^{-nu}/nu. The rescaled time runs forward
// while t decreases to 0, so beta = lambda'(tau)/lambda(tau) > 0.
class ScalingMap {
 public:
  // lambda(t) = norm * t^{-1-nu}, tau(t) = norm * t^{-nu} / nu
  explicit ScalingMap(double nu, double norm = 1.0) : nu_(nu), norm_(norm) {}
  double nu() const { return nu_; }
  double t_of_tau(double tau) const;
  double tau_of_t(double t) const;
  double lambda_t(double t) const;
  double lambda(double tau) const;
  double beta(double tau) const;
  double dbeta(double tau) const;
  // int_a^b lambda(u)^{-1} du
  double inv_lambda_integral(double a, double b) const;

 private:
  double nu_, norm_;
};

// Time dependence of the background as seen by the Fourier-side
// propagators: either the power law above or a frozen (static) scale.
class Scaling {
 public:
  static Scaling power(double nu, double norm = 1.0);
  static Scaling frozen(double lambda0 = 1.0);
  bool is_static() const { return static_; }
  double nu() const { return map_.nu(); }
  double lambda(double tau) const;
  double beta(double tau) const;
  double dbeta(double tau) const;
  double inv_lambda_integral(double a, double b) const;
  // the time b > a with inv_lambda_integral(a, b) = S
  double advance(double a, double S) const;

 private:
  Scaling(bool st, ScalingMap m, double l0) : static_(st), map_(m), l0_(l0) {}
  bool static_;
  ScalingMap map_;
  double l0_;
};

}  // namespace wm
