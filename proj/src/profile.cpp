#include "wmlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wm {

void BlowupParameters::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (!(nu > 0 && nu <= 0.5))
    fail("params.nu = " + std::to_string(nu) + " violates bound (0, 1/2]");
  if (!(tau0 >= 1)) fail("params.tau0 = " + std::to_string(tau0) + " violates bound tau0 >= 1");
  if (!(kappa > 0 && kappa < 0.5))
    fail("params.kappa = " + std::to_string(kappa) + " violates bound (0, 1/2)");
  if (n_diag < 2) fail("params.n_diag = " + std::to_string(n_diag) + " violates bound n_diag >= 2");
}

double eval_Q(double R) { return 2.0 * std::atan(R); }
double eval_phi0(double R) { return R / (1.0 + R * R); }

double eval_W(double R) {
  double a = 1.0 + R * R;
  return 16.0 / (a * a) - 32.0 / (a * a * a);
}

double eval_W_commutator(double R) {
  double a = 1.0 + R * R;
  return 8.0 / (a * a);
}

double eval_U(double R) {
  double a = 1.0 + R * R;
  return -4.0 * R / (a * a);
}

double potential_L(double R) {
  double r2 = R * R, a = 1.0 + r2;
  return (1.0 - 6.0 * r2 + r2 * r2) / (r2 * a * a);
}

double potential_Ltilde(double R) { return 4.0 / (R * R * (1.0 + R * R)); }

namespace {

void check(const RadialFunction& f) {
  if (!f.grid || f.grid->size() < 5) throw std::invalid_argument("degenerate grid: need at least 5 nodes");
  if (f.values.size() != f.grid->size()) throw std::invalid_argument("values do not match grid size");
}

// f' with the two smallest nodes replaced by the series value p f / R
std::vector<double> deriv_origin(const RadialFunction& f) {
  std::vector<double> d = f.grid->d1(f.values);
  for (size_t i = 0; i < 2; ++i) d[i] = f.origin_order * f.values[i] / f.grid->R(i);
  return d;
}

}  // namespace

RadialFunction apply_D(const RadialFunction& f) {
  check(f);
  if (f.origin_order < 1) throw std::invalid_argument("apply_D: origin_order must be >= 1");
  std::vector<double> d = deriv_origin(f);
  std::vector<double> out(f.size());
  for (size_t i = 0; i < out.size(); ++i) {
    double R = f.grid->R(i), r2 = R * R;
    out[i] = d[i] + f.values[i] * (r2 - 1.0) / (R * (r2 + 1.0));
  }
  return RadialFunction(f.grid, std::move(out), f.origin_order - 1);
}

RadialFunction apply_Dstar(const RadialFunction& f) {
  check(f);
  if (f.origin_order < 1) throw std::invalid_argument("apply_Dstar: origin_order must be >= 1");
  std::vector<double> d = deriv_origin(f);
  std::vector<double> out(f.size());
  for (size_t i = 0; i < out.size(); ++i) {
    double R = f.grid->R(i), r2 = R * R;
    out[i] = -d[i] - f.values[i] / R - f.values[i] * (1.0 - r2) / (R * (1.0 + r2));
  }
  return RadialFunction(f.grid, std::move(out), f.origin_order - 1);
}

RadialFunction apply_L(const RadialFunction& f) {
  if (f.origin_order < 2) throw std::invalid_argument("apply_L: origin_order must be >= 2");
  RadialFunction g = apply_Dstar(apply_D(f));
  g.origin_order = f.origin_order - 2;
  return g;
}

RadialFunction apply_Ltilde(const RadialFunction& f) {
  if (f.origin_order < 2) throw std::invalid_argument("apply_Ltilde: origin_order must be >= 2");
  RadialFunction g = apply_D(apply_Dstar(f));
  g.origin_order = f.origin_order;
  return g;
}

namespace {

RadialFunction potential_form(const RadialFunction& f, double (*V)(double), int out_order) {
  check(f);
  std::vector<double> d = f.grid->d1(f.values), dd = f.grid->d2(f.values);
  int p = f.origin_order;
  for (size_t i = 0; i < 2; ++i) {
    double R = f.grid->R(i);
    d[i] = p * f.values[i] / R;
    dd[i] = p * (p - 1) * f.values[i] / (R * R);
  }
  std::vector<double> out(f.size());
  for (size_t i = 0; i < out.size(); ++i) {
    double R = f.grid->R(i);
    out[i] = -dd[i] - d[i] / R + V(R) * f.values[i];
  }
  return RadialFunction(f.grid, std::move(out), out_order);
}

}  // namespace

RadialFunction apply_L_potential(const RadialFunction& f) {
  return potential_form(f, potential_L, f.origin_order - 2);
}

RadialFunction apply_Ltilde_potential(const RadialFunction& f) {
  return potential_form(f, potential_Ltilde, f.origin_order);
}

RadialFunction right_inverse_phi(const RadialFunction& g) {
  check(g);
  if (g.origin_order < 2)
    throw std::invalid_argument("right_inverse_phi: origin_order must be >= 2 (divergent integrand)");
  std::vector<double> h(g.size());
  for (size_t i = 0; i < h.size(); ++i) h[i] = g.values[i] / eval_phi0(g.grid->R(i));
  std::vector<double> c = g.grid->cumulative(h, g.origin_order - 1);
  for (size_t i = 0; i < c.size(); ++i) c[i] *= eval_phi0(g.grid->R(i));
  return RadialFunction(g.grid, std::move(c), g.origin_order + 1);
}

namespace {

std::vector<double> energy_density(const RadialFunction& u, const RadialFunction& ut) {
  check(u);
  std::vector<double> ur = u.grid->d1(u.values);
  if (u.origin_order >= 1)
    for (size_t i = 0; i < 2; ++i) ur[i] = u.origin_order * u.values[i] / u.grid->R(i);
  std::vector<double> e(u.size());
  for (size_t i = 0; i < e.size(); ++i) {
    double r = u.grid->R(i), s = std::sin(u.values[i]);
    e[i] = 0.5 * (ur[i] * ur[i] + ut.values[i] * ut.values[i]) + s * s / (2 * r * r);
  }
  return e;
}

}  // namespace

double energy(const RadialFunction& u, const RadialFunction& ut) {
  return u.grid->integrate(energy_density(u, ut));
}

double local_energy(const RadialFunction& e, const RadialFunction& et, double radius) {
  const auto& g = *e.grid;
  if (radius <= g.R(0)) return 0.0;
  std::vector<double> d = energy_density(e, et);
  for (size_t i = 0; i < d.size(); ++i) d[i] *= g.R(i);
  std::vector<double> c = g.cumulative(d, 2.0 * std::max(0, e.origin_order - 1) + 1);
  const auto& r = g.nodes();
  if (radius >= r.back()) return c.back();
  size_t k = std::upper_bound(r.begin(), r.end(), radius) - r.begin();
  double t = (radius - r[k - 1]) / (r[k] - r[k - 1]);
  return c[k - 1] + t * (c[k] - c[k - 1]);
}

double ScalingMap::t_of_tau(double tau) const { return std::pow(nu_ * tau / norm_, -1.0 / nu_); }
double ScalingMap::tau_of_t(double t) const { return norm_ * std::pow(t, -nu_) / nu_; }
double ScalingMap::lambda_t(double t) const { return norm_ * std::pow(t, -1.0 - nu_); }
double ScalingMap::lambda(double tau) const { return lambda_t(t_of_tau(tau)); }
double ScalingMap::beta(double tau) const { return (1.0 + nu_) / (nu_ * tau); }
double ScalingMap::dbeta(double tau) const { return -(1.0 + nu_) / (nu_ * tau * tau); }

double ScalingMap::inv_lambda_integral(double a, double b) const {
  // int_a^b lambda^{-1} dtau = t(a) - t(b)
  return -t_of_tau(a) * std::expm1(-std::log(b / a) / nu_);
}

Scaling Scaling::power(double nu, double norm) { return Scaling(false, ScalingMap(nu, norm), 1.0); }
Scaling Scaling::frozen(double lambda0) { return Scaling(true, ScalingMap(0.25), lambda0); }

double Scaling::lambda(double tau) const { return static_ ? l0_ : map_.lambda(tau); }
double Scaling::beta(double tau) const { return static_ ? 0.0 : map_.beta(tau); }
double Scaling::dbeta(double tau) const { return static_ ? 0.0 : map_.dbeta(tau); }
double Scaling::inv_lambda_integral(double a, double b) const {
  return static_ ? (b - a) / l0_ : map_.inv_lambda_integral(a, b);
}
double Scaling::advance(double a, double S) const {
  return static_ ? a + l0_ * S : map_.tau_of_t(map_.t_of_tau(a) - S);
}

}  // namespace wm
