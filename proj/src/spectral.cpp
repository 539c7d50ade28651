#include "wmlab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "wmlab/profile.hpp"

namespace wm {

namespace ode = boost::numeric::odeint;

//===----------------------------------------------------------------------===//
// Frequency grid and coefficient arithmetic
//===----------------------------------------------------------------------===//

std::shared_ptr<const FrequencyGrid> FrequencyGrid::log_spaced(double lo, double hi, int n) {
  if (n < 8 || !(lo > 0) || !(hi > lo)) throw std::invalid_argument("frequency grid: need n >= 8 and 0 < lo < hi");
  auto g = std::make_shared<FrequencyGrid>();
  double a = std::log(lo), b = std::log(hi);
  g->h = (b - a) / (n - 1);
  for (int j = 0; j < n; ++j) {
    double u = a + g->h * j;
    g->logxi.push_back(u);
    g->xi.push_back(std::exp(u));
    double wt = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    g->w.push_back(wt * g->h * g->xi.back());
  }
  return g;
}

SpectralCoefficients& SpectralCoefficients::operator+=(const SpectralCoefficients& o) {
  for (size_t j = 0; j < values.size(); ++j) values[j] += o.values[j];
  return *this;
}

SpectralCoefficients& SpectralCoefficients::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

SpectralCoefficients operator+(SpectralCoefficients a, const SpectralCoefficients& b) { return a += b; }
SpectralCoefficients operator-(SpectralCoefficients a, const SpectralCoefficients& b) {
  for (size_t j = 0; j < a.values.size(); ++j) a.values[j] -= b.values[j];
  return a;
}
SpectralCoefficients operator*(double s, SpectralCoefficients a) { return a *= s; }

//===----------------------------------------------------------------------===//
// Interpolation in log xi
//===----------------------------------------------------------------------===//

namespace {

double fit_exponent(const SpectralCoefficients& x, int m, bool top) {
  size_t n = x.size();
  m = std::min<int>(m, int(n));
  double peak = 0;
  for (double v : x.values) peak = std::max(peak, std::abs(v));
  double su = 0, sy = 0, suu = 0, suy = 0;
  double amax = 0;
  for (int k = 0; k < m; ++k) {
    size_t j = top ? n - 1 - k : size_t(k);
    amax = std::max(amax, std::abs(x.values[j]));
  }
  // a tail below 1e-6 of the peak is quadrature noise; treat it as rapidly decaying
  if (amax <= 1e-200 || amax <= 1e-6 * peak) return top ? -8.0 : 8.0;
  for (int k = 0; k < m; ++k) {
    size_t j = top ? n - 1 - k : size_t(k);
    double u = x.grid->logxi[j];
    double y = std::log(std::abs(x.values[j]) + 1e-300);
    su += u; sy += y; suu += u * u; suy += u * y;
  }
  double den = m * suu - su * su;
  return (m * suy - su * sy) / den;
}

}  // namespace

double fit_upper_exponent(const SpectralCoefficients& x, int m) { return fit_exponent(x, m, true); }
double fit_lower_exponent(const SpectralCoefficients& x, int m) { return fit_exponent(x, m, false); }

LogInterp::LogInterp(const SpectralCoefficients& x) : g_(x.grid.get()), v_(&x.values) {
  declared_ = !std::isnan(x.upper_exponent);
  pu_ = declared_ ? x.upper_exponent : fit_upper_exponent(x);
  pl_ = !std::isnan(x.lower_exponent) ? x.lower_exponent : 0.0;
}

bool LogInterp::admissible(double zeta) const {
  double u = std::log(zeta);
  double lo = g_->logxi.front(), hi = g_->logxi.back();
  const double decade = std::log(10.0);
  if (u >= lo - decade && u <= hi + decade) return true;
  if (u > hi) return pu_ < 0;
  return true;
}

double LogInterp::operator()(double zeta) const {
  const auto& v = *v_;
  size_t n = v.size();
  double u = std::log(zeta);
  double lo = g_->logxi.front(), hi = g_->logxi.back();
  if (u >= hi) return v[n - 1] * std::exp(pu_ * (u - hi));
  if (u <= lo) return v[0] * std::exp(pl_ * (u - lo));
  double p = (u - lo) / g_->h;
  long i = long(std::floor(p));
  if (i > long(n) - 2) i = long(n) - 2;
  // four-point Lagrange on i-1..i+2, shifted at the ends
  long b = std::clamp(i - 1, 0L, long(n) - 4);
  double s = p - double(b);
  double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  double l1 = s * (s - 2) * (s - 3) / 2.0;
  double l2 = -s * (s - 1) * (s - 3) / 2.0;
  double l3 = s * (s - 1) * (s - 2) / 6.0;
  return l0 * v[b] + l1 * v[b + 1] + l2 * v[b + 2] + l3 * v[b + 3];
}

//===----------------------------------------------------------------------===//
// Eigenfunctions
//===----------------------------------------------------------------------===//

nlohmann::json BasisConfig::to_json() const {
  return {{"grid", grid.to_json()},   {"xi_min", xi_min},
          {"xi_max", xi_max},         {"n_xi", n_xi},
          {"prufer_switch", prufer_switch}, {"amp_radius", amp_radius},
          {"rtol", rtol}};
}

BasisConfig BasisConfig::from_json(const nlohmann::json& j) {
  BasisConfig c;
  if (j.contains("grid")) c.grid = GridSpec::from_json(j["grid"]);
  c.xi_min = j.value("xi_min", c.xi_min);
  c.xi_max = j.value("xi_max", c.xi_max);
  c.n_xi = j.value("n_xi", c.n_xi);
  c.prufer_switch = j.value("prufer_switch", c.prufer_switch);
  c.amp_radius = j.value("amp_radius", c.amp_radius);
  c.rtol = j.value("rtol", c.rtol);
  return c;
}

EigenColumn build_eigenfunction(double xi, const RadialGrid& grid, const BasisConfig& cfg) {
  if (!(xi > 0)) throw std::invalid_argument("build_eigenfunction: xi must be positive");
  const double k = std::sqrt(xi);
  const auto& r = grid.nodes();
  const size_t n = r.size();
  const double r0 = r[0];
  EigenColumn col;
  col.xi = xi;
  col.phi.assign(n, 0.0);
  col.dphi.assign(n, 0.0);

  // series launch phi = R^2 sum a_k R^{2k}
  if (r0 * k > 0.5 || r0 > 0.5)
    throw std::runtime_error("non-convergent series launch: R_min*sqrt(xi) = " + std::to_string(r0 * k));
  std::vector<double> a{1.0};
  double x2 = r0 * r0, pw = 1.0, phi = 1.0, dphi_t = 2.0;
  bool converged = false;
  for (int K = 1; K < 200; ++K) {
    double s = 0;
    for (int j = 1; j <= K; ++j) s += ((j & 1) ? -4.0 : 4.0) * a[K - j];
    s -= xi * a[K - 1];
    a.push_back(s / ((2.0 + 2.0 * K) * (2.0 + 2.0 * K) - 4.0));
    pw *= x2;
    double term = a.back() * pw;
    phi += term;
    dphi_t += (2.0 + 2.0 * K) * term;
    if (std::abs(term) < 1e-18 * std::abs(phi)) {
      converged = true;
      col.series_terms = size_t(K);
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("non-convergent series launch at R_min = " + std::to_string(r0));
  phi *= x2;
  dphi_t *= x2;  // R dphi/dR

  using state = std::array<double, 2>;
  const double r_sw = cfg.prufer_switch / k;

  // phase 1 in t = log R: phi_tt = (4/(1+R^2) - xi R^2) phi
  auto sys1 = [xi](const state& y, state& dy, double t) {
    double R = std::exp(t), R2 = R * R;
    dy[0] = y[1];
    dy[1] = (4.0 / (1.0 + R2) - xi * R2) * y[0];
  };
  std::vector<double> times;
  size_t i_sw = 0;
  while (i_sw < n && r[i_sw] <= r_sw) {
    times.push_back(std::log(r[i_sw]));
    ++i_sw;
  }
  times.push_back(std::log(r_sw));
  state y{phi, dphi_t};
  size_t idx = 0;
  auto obs1 = [&](const state& s, double t) {
    if (idx < i_sw) {
      double R = std::exp(t);
      col.phi[idx] = s[0];
      col.dphi[idx] = s[1] / R;
    }
    ++idx;
  };
  auto stepper1 = ode::make_controlled(1e-300, cfg.rtol, ode::runge_kutta_fehlberg78<state>());
  col.ode_steps += ode::integrate_times(stepper1, sys1, y, times.begin(), times.end(), 1e-3, obs1);
  // overwrite node 0 with the series values exactly
  col.phi[0] = phi;
  col.dphi[0] = dphi_t / r0;

  // phase 2: psi = R^{1/2} phi = a sin(kR + theta)
  double Rs = r_sw;
  double ph = y[0], dph = y[1] / Rs;
  double psi = std::sqrt(Rs) * ph;
  double dpsi = std::sqrt(Rs) * (dph + ph / (2 * Rs));
  double amp0 = std::hypot(psi, dpsi / k);
  double Theta = std::atan2(psi, dpsi / k);
  state z{std::log(amp0), Theta - k * Rs};
  auto sys2 = [k](const state& s, state& dz, double R) {
    double R2 = R * R;
    double q = 4.0 / (R2 * (1.0 + R2)) - 0.25 / R2;
    double Th = k * R + s[1];
    double sn = std::sin(Th), cs = std::cos(Th);
    dz[0] = (q / k) * sn * cs;
    dz[1] = -(q / k) * sn * sn;
  };
  auto stepper2 = ode::make_controlled(cfg.rtol, cfg.rtol, ode::runge_kutta_fehlberg78<state>());
  std::vector<double> t2{Rs};
  for (size_t i = i_sw; i < n; ++i) t2.push_back(r[i]);
  idx = 0;
  auto obs2 = [&](const state& s, double R) {
    if (idx > 0) {
      size_t i = i_sw + idx - 1;
      double am = std::exp(s[0]);
      double Th = k * R + s[1];
      double ps = am * std::sin(Th);
      double sq = std::sqrt(R);
      col.phi[i] = ps / sq;
      col.dphi[i] = (am * k * std::cos(Th)) / sq - ps / (2 * R * sq);
    }
    ++idx;
  };
  if (t2.size() > 1)
    col.ode_steps += ode::integrate_times(stepper2, sys2, z, t2.begin(), t2.end(), 1e-3 / k, obs2);
  double R_here = t2.back();

  // amplitude fit over the last two periods
  const double period = 2 * M_PI / k;
  double R_fit = std::max({R_here, Rs, cfg.amp_radius / k});
  const int m = 64;
  std::vector<double> t3{R_here};
  for (int j = 0; j < m; ++j) {
    double R = R_fit + 2 * period * double(j) / (m - 1);
    if (R > t3.back()) t3.push_back(R);
  }
  std::vector<double> fr, fpsi;
  idx = 0;
  auto obs3 = [&](const state& s, double R) {
    if (idx > 0) {
      fr.push_back(R);
      fpsi.push_back(std::exp(s[0]) * std::sin(k * R + s[1]));
    }
    ++idx;
  };
  col.ode_steps += ode::integrate_times(stepper2, sys2, z, t3.begin(), t3.end(), 1e-3 / k, obs3);
  // least squares psi = al sin(kR) + be cos(kR)
  double ss = 0, sc = 0, cc = 0, ps = 0, pc = 0;
  for (size_t j = 0; j < fr.size(); ++j) {
    double sn = std::sin(k * fr[j]), cs = std::cos(k * fr[j]);
    ss += sn * sn; sc += sn * cs; cc += cs * cs;
    ps += fpsi[j] * sn; pc += fpsi[j] * cs;
  }
  double det = ss * cc - sc * sc;
  double al = (ps * cc - pc * sc) / det;
  double be = (pc * ss - ps * sc) / det;
  col.amp = std::hypot(al, be);
  col.theta = std::atan2(be, al);
  col.c2 = 1.0;
  return col;
}

Eigen::MatrixXd EigenbasisTable::dstar_phi() const {
  Eigen::MatrixXd out(phi.rows(), phi.cols());
  const auto& r = grid->nodes();
  for (Eigen::Index j = 0; j < phi.cols(); ++j)
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
      double R = r[size_t(i)], r2 = R * R;
      out(i, j) = -dphi(i, j) - phi(i, j) / R - phi(i, j) * (1 - r2) / (R * (1 + r2));
    }
  return out;
}

EigenbasisTable build_basis(const BasisConfig& cfg) {
  EigenbasisTable t;
  t.config = cfg;
  t.grid = RadialGrid::make(cfg.grid);
  t.freq = FrequencyGrid::log_spaced(cfg.xi_min, cfg.xi_max, cfg.n_xi);
  size_t nr = t.grid->size(), nx = t.freq->size();
  t.phi.resize(Eigen::Index(nr), Eigen::Index(nx));
  t.dphi.resize(Eigen::Index(nr), Eigen::Index(nx));
  t.c2.assign(nx, 1.0);
  t.amp.assign(nx, 0.0);
  t.theta.assign(nx, 0.0);
  t.a_abs.assign(nx, 0.0);
  t.rho_weyl.assign(nx, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < long(nx); ++j) {
    double xi = t.freq->xi[size_t(j)];
    EigenColumn c = build_eigenfunction(xi, *t.grid, cfg);
    for (size_t i = 0; i < nr; ++i) {
      t.phi(Eigen::Index(i), j) = c.phi[i];
      t.dphi(Eigen::Index(i), j) = c.dphi[i];
    }
    t.amp[size_t(j)] = c.amp;
    t.theta[size_t(j)] = c.theta;
    t.c2[size_t(j)] = c.c2;
    t.a_abs[size_t(j)] = c.amp * std::pow(xi, 0.75);
    t.rho_weyl[size_t(j)] = 1.0 / (M_PI * std::sqrt(xi) * c.amp * c.amp);
  }
  t.rho = t.rho_weyl;
  return t;
}

//===----------------------------------------------------------------------===//
// Measure, transforms, norms
//===----------------------------------------------------------------------===//

namespace {

RadialFunction r2_bump(GridPtr g, double c, double w) {
  return RadialFunction::sample(
      g, [c, w](double R) { return (R / c) * (R / c) * std::exp(-((R - c) / w) * ((R - c) / w)); }, 2);
}

}  // namespace

std::vector<RadialFunction> default_calibration_set(GridPtr g) {
  std::vector<RadialFunction> s;
  for (double c : {0.5, 1.0, 2.0, 4.0}) s.push_back(r2_bump(g, c, 0.35 * c));
  return s;
}

RadialFunction heldout_gaussian(GridPtr g) { return r2_bump(g, 1.5, 0.6); }

void build_measure(EigenbasisTable& basis, const std::vector<RadialFunction>& set) {
  if (set.empty()) throw std::invalid_argument("build_measure: empty calibration set");
  std::vector<double> ratio;
  basis.rho = basis.rho_weyl;
  for (const auto& f : set) {
    if (f.origin_order < 2) throw std::invalid_argument("build_measure: calibration member with origin_order < 2");
    double g2 = f.dot(f);
    double p = l2_rho(forward_transform(f, basis), basis);
    ratio.push_back(p * p / g2);
  }
  double sr = 0, srr = 0;
  for (double q : ratio) { sr += q; srr += q * q; }
  double gamma = sr / srr;
  double worst = 0;
  for (double q : ratio) worst = std::max(worst, std::abs(1 - gamma * q));
  basis.calibration = gamma;
  basis.calibration_residual = worst;
  basis.calibration_flag = std::abs(gamma - 1) > 0.05;
  for (size_t j = 0; j < basis.rho.size(); ++j) basis.rho[j] = gamma * basis.rho_weyl[j];
  if (worst > 0.05)
    throw std::runtime_error("build_measure: calibration residual " + std::to_string(worst) +
                             " exceeds 5% (gamma = " + std::to_string(gamma) + ")");
}

SpectralCoefficients forward_transform(const RadialFunction& f, const EigenbasisTable& basis) {
  if (f.grid.get() != basis.grid.get() && f.size() != basis.n_r())
    throw std::invalid_argument("forward_transform: function not on the basis grid");
  const auto& w = basis.grid->weights();
  Eigen::VectorXd g(Eigen::Index(f.size()));
  for (size_t i = 0; i < f.size(); ++i) g(Eigen::Index(i)) = w[i] * f.values[i];
  Eigen::VectorXd x = basis.phi.transpose() * g;
  return SpectralCoefficients(basis.freq, std::vector<double>(x.data(), x.data() + x.size()));
}

Eigen::MatrixXd forward_transform(const Eigen::MatrixXd& f, const EigenbasisTable& basis) {
  const auto& w = basis.grid->weights();
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), Eigen::Index(w.size()));
  return basis.phi.transpose() * (wv.asDiagonal() * f);
}

RadialFunction inverse_transform(const SpectralCoefficients& x, const EigenbasisTable& basis) {
  const auto& fw = basis.freq->w;
  Eigen::VectorXd c(Eigen::Index(x.size()));
  for (size_t j = 0; j < x.size(); ++j) c(Eigen::Index(j)) = x.values[j] * basis.rho[j] * fw[j];
  Eigen::VectorXd f = basis.phi * c;
  return RadialFunction(basis.grid, std::vector<double>(f.data(), f.data() + f.size()), 2);
}

Eigen::MatrixXd inverse_transform_matrix(const Eigen::MatrixXd& x, const EigenbasisTable& basis) {
  Eigen::VectorXd m(Eigen::Index(basis.n_xi()));
  for (size_t j = 0; j < basis.n_xi(); ++j) m(Eigen::Index(j)) = basis.rho[j] * basis.freq->w[j];
  return basis.phi * (m.asDiagonal() * x);
}

double l2_rho(const SpectralCoefficients& x, const EigenbasisTable& basis) {
  double s = 0;
  for (size_t j = 0; j < x.size(); ++j) s += basis.freq->w[j] * basis.rho[j] * x.values[j] * x.values[j];
  return std::sqrt(s);
}

double parseval_defect(const RadialFunction& f, const EigenbasisTable& basis) {
  double g2 = f.dot(f);
  double p = l2_rho(forward_transform(f, basis), basis);
  return std::abs(g2 - p * p) / g2;
}

double s0_weight(double xi, double kappa) {
  double jx = std::sqrt(1 + xi * xi);
  double lg = std::log(xi);
  double jl = std::sqrt(1 + lg * lg);
  return std::pow(jx, 2 + kappa) * std::sqrt(xi) * std::pow(jl, -1 - kappa);
}

double s0_norm(const SpectralCoefficients& x, double kappa) {
  const auto& g = *x.grid;
  double s = 0;
  for (size_t j = 0; j < x.size(); ++j) {
    double v = s0_weight(g.xi[j], kappa) * x.values[j];
    s += g.w[j] * v * v;
  }
  return std::sqrt(s);
}

double s1_norm(const SpectralCoefficients& x, double kappa) {
  SpectralCoefficients y = x;
  for (size_t j = 0; j < y.size(); ++j) y.values[j] /= std::sqrt(x.grid->xi[j]);
  return s0_norm(y, kappa);
}

SupCheck weighted_sup_check(const SpectralCoefficients& x, const EigenbasisTable& basis, double kappa) {
  SupCheck out;
  RadialFunction f = inverse_transform(x, basis);
  for (size_t i = 0; i < f.size(); ++i) {
    double lg = std::log(basis.grid->R(i));
    out.lhs = std::max(out.lhs, std::abs(f.values[i]) / std::sqrt(1 + lg * lg));
  }
  SpectralCoefficients y = x;
  for (size_t j = 0; j < y.size(); ++j) y.values[j] /= std::pow(1 + x.grid->xi[j] * x.grid->xi[j], 0.25);
  out.rhs = s0_norm(y, kappa);
  return out;
}

ResidualReport eigen_residuals(const EigenbasisTable& basis, double fraction) {
  ResidualReport rep;
  size_t nx = basis.n_xi(), nr = basis.n_r();
  size_t lim = size_t(fraction * double(nr));
  rep.per_xi.assign(nx, 0.0);
  const auto& w = basis.grid->weights();
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < long(nx); ++j) {
    std::vector<double> v(nr);
    for (size_t i = 0; i < nr; ++i) v[i] = basis.phi(Eigen::Index(i), j);
    RadialFunction f(basis.grid, v, 2);
    RadialFunction lf = apply_Ltilde(f);
    double xi = basis.freq->xi[size_t(j)];
    double num = 0, den = 0;
    for (size_t i = 0; i < lim; ++i) {
      double d = lf.values[i] - xi * v[i];
      num += w[i] * d * d;
      den += w[i] * v[i] * v[i];
    }
    rep.per_xi[size_t(j)] = std::sqrt(num / den);
  }
  for (size_t j = 0; j < nx; ++j)
    if (rep.per_xi[j] > rep.max_residual) {
      rep.max_residual = rep.per_xi[j];
      rep.xi_at_max = basis.freq->xi[j];
    }
  return rep;
}

}  // namespace wm
