#include "wmlab/propagators.hpp"

#include <algorithm>
#include <exception>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wmlab/numerics.hpp"

namespace wm {

//===----------------------------------------------------------------------===//
// Dilation operator and free waves
//===----------------------------------------------------------------------===//

SpectralCoefficients apply_Dtau(const std::vector<SpectralCoefficients>& history, const std::vector<double>& taus,
                                size_t k, const Scaling& s) {
  const size_t n = history.size();
  if (n < 3 || taus.size() != n) throw std::invalid_argument("apply_Dtau: need at least 3 tau slices");
  if (k >= n) throw std::out_of_range("apply_Dtau: slice index out of range");
  // three nodes around k, shifted inward at the ends
  size_t c = std::clamp<size_t>(k, 1, n - 2);
  double t0 = taus[c - 1], t1 = taus[c], t2 = taus[c + 1], t = taus[k];
  // derivative of the quadratic interpolant at t
  double w0 = ((t - t1) + (t - t2)) / ((t0 - t1) * (t0 - t2));
  double w1 = ((t - t0) + (t - t2)) / ((t1 - t0) * (t1 - t2));
  double w2 = ((t - t0) + (t - t1)) / ((t2 - t0) * (t2 - t1));
  const auto& x = history[k];
  SpectralCoefficients dxi = xi_dxi(x);
  double b = s.beta(t);
  SpectralCoefficients out = x;
  for (size_t j = 0; j < x.size(); ++j) {
    double dt = w0 * history[c - 1].values[j] + w1 * history[c].values[j] + w2 * history[c + 1].values[j];
    out.values[j] = dt - 2 * b * dxi.values[j] - b * x.values[j];
  }
  out.upper_exponent = out.lower_exponent = std::numeric_limits<double>::quiet_NaN();
  return out;
}

namespace {

void check_admissible(const LogInterp& li, double zeta) {
  if (!li.admissible(zeta)) {
    std::ostringstream os;
    os << "rescaled argument " << zeta << " leaves the frequency grid by more than a decade without a decaying tail";
    throw std::domain_error(os.str());
  }
}

}  // namespace

void free_evolve_at(const SpectralCoefficients& x0, const SpectralCoefficients& x1, double tau0, double tau,
                    const std::vector<double>& xi, const Scaling& s, std::vector<double>& x, std::vector<double>& dx) {
  if (tau < tau0) throw std::invalid_argument("free_evolve: tau < tau0");
  LogInterp X0(x0), X1(x1);
  double lt = s.lambda(tau), l0 = s.lambda(tau0);
  double S = s.inv_lambda_integral(tau0, tau);
  double q = lt / l0;
  x.assign(xi.size(), 0.0);
  dx.assign(xi.size(), 0.0);
  for (size_t j = 0; j < xi.size(); ++j) {
    double k = std::sqrt(xi[j]);
    double zeta = q * q * xi[j];
    double a0 = 0, a1 = 0;
    if (tau == tau0) {
      a0 = X0(zeta);
      a1 = X1(zeta);
      x[j] = a0;
      dx[j] = a1;
      continue;
    }
    check_admissible(X0, zeta);
    check_admissible(X1, zeta);
    a0 = X0(zeta);
    a1 = X1(zeta);
    double th = lt * k * S;
    double sn = std::sin(th), cs = std::cos(th);
    x[j] = q * cs * a0 + sn * a1 / k;
    dx[j] = -q * k * sn * a0 + cs * a1;
  }
}

SpectralState free_evolve(const SpectralCoefficients& x0, const SpectralCoefficients& x1, double tau0, double tau,
                          const Scaling& s) {
  if (x0.grid != x1.grid && x0.grid->xi != x1.grid->xi)
    throw std::invalid_argument("free_evolve: data on different frequency grids");
  SpectralState st;
  st.tau = tau;
  st.x = SpectralCoefficients::zeros(x0.grid);
  st.dtau_x = SpectralCoefficients::zeros(x0.grid);
  if (tau == tau0) {
    st.x.values = x0.values;
    st.dtau_x.values = x1.values;
    return st;
  }
  free_evolve_at(x0, x1, tau0, tau, x0.grid->xi, s, st.x.values, st.dtau_x.values);
  return st;
}

//===----------------------------------------------------------------------===//
// Duhamel integrals
//===----------------------------------------------------------------------===//

SourceFn family_source(const std::vector<double>& taus, const std::vector<SpectralCoefficients>& slices) {
  if (taus.size() != slices.size() || taus.empty())
    throw std::invalid_argument("family_source: need one slice per tau node");
  struct Holder {
    std::vector<double> taus;
    std::vector<SpectralCoefficients> slices;
    std::vector<LogInterp> li;
  };
  auto h = std::make_shared<Holder>();
  h->taus = taus;
  h->slices = slices;
  h->li.reserve(slices.size());
  for (const auto& sl : h->slices) h->li.emplace_back(sl);
  return [h](double sigma, double zeta) {
    const auto& t = h->taus;
    size_t n = t.size();
    if (n == 1 || sigma <= t.front()) {
      check_admissible(h->li.front(), zeta);
      return h->li.front()(zeta);
    }
    if (sigma >= t.back()) {
      check_admissible(h->li.back(), zeta);
      return h->li.back()(zeta);
    }
    size_t k = size_t(std::upper_bound(t.begin(), t.end(), sigma) - t.begin()) - 1;
    double w = (sigma - t[k]) / (t[k + 1] - t[k]);
    double v = 0;
    if (w < 1 - 1e-12) {
      check_admissible(h->li[k], zeta);
      v += (1 - w) * h->li[k](zeta);
    }
    if (w > 1e-12) {
      check_admissible(h->li[k + 1], zeta);
      v += w * h->li[k + 1](zeta);
    }
    return v;
  };
}

void oscillatory_integrals(const SourceFn& f, const std::vector<double>& sigma_nodes, double tau,
                           const std::vector<double>& xi, const Scaling& s, const QuadratureOptions& q,
                           std::vector<double>* i_sin, std::vector<double>* i_cos) {
  const size_t nx = xi.size();
  if (i_sin) i_sin->assign(nx, 0.0);
  if (i_cos) i_cos->assign(nx, 0.0);
  if (sigma_nodes.empty() || tau < sigma_nodes.front())
    throw std::invalid_argument("oscillatory_integrals: tau precedes the first sigma node");
  std::vector<double> nodes;
  for (double sg : sigma_nodes) {
    if (sg < tau) nodes.push_back(sg);
  }
  nodes.push_back(tau);
  if (nodes.size() < 2) return;
  const double lt = s.lambda(tau);
  const double kmax = std::sqrt(*std::max_element(xi.begin(), xi.end()));
  const int cap = std::max(1, q.max_substeps);

  std::vector<double> sk(nx);
  for (size_t j = 0; j < nx; ++j) sk[j] = std::sqrt(xi[j]);

  // per sub-step count m: sub-node lambda and S(sigma_q, tau)
  std::vector<std::vector<double>> sig(cap + 1), lam(cap + 1), srem(cap + 1);
  std::exception_ptr err;

  for (size_t iv = 0; iv + 1 < nodes.size(); ++iv) {
    double a = nodes[iv], b = nodes[iv + 1];
    double sab = s.inv_lambda_integral(a, b);
    double s_a_tau = s.inv_lambda_integral(a, tau);
    int mneed = std::clamp(int(std::ceil(lt * kmax * sab / q.max_phase_step)), 1, cap);
    for (int m = 1; m <= mneed; ++m) {
      sig[m].resize(m + 1);
      lam[m].resize(m + 1);
      srem[m].resize(m + 1);
      for (int k = 0; k <= m; ++k) {
        double sq = k == 0 ? a : (k == m ? b : s.advance(a, sab * k / m));
        sig[m][k] = sq;
        lam[m][k] = s.lambda(sq);
        srem[m][k] = k == 0 ? s_a_tau : s.inv_lambda_integral(sq, tau);
      }
    }
#pragma omp parallel for schedule(static)
    for (long jj = 0; jj < long(nx); ++jj) {
      size_t j = size_t(jj);
      try {
        double k = sk[j];
        int m = std::clamp(int(std::ceil(lt * k * sab / q.max_phase_step)), 1, cap);
        double ds = sab / m;
        double gp = 0, thp = 0, snp = 0, csp = 0;
        double accs = 0, accc = 0;
        for (int r = 0; r <= m; ++r) {
          double l = lam[m][r];
          double ratio = lt / l;
          double g = f(sig[m][r], ratio * ratio * xi[j]) * l;
          double th = lt * k * srem[m][r];
          double sn = std::sin(th), cs = std::cos(th);
          if (r > 0) {
            if (i_sin) accs += ds * filon_sin(gp, g, thp, th, snp, csp, sn, cs);
            if (i_cos) accc += ds * filon_cos(gp, g, thp, th, snp, csp, sn, cs);
          }
          gp = g;
          thp = th;
          snp = sn;
          csp = cs;
        }
        if (i_sin) (*i_sin)[j] += accs;
        if (i_cos) (*i_cos)[j] += accc;
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  }
}

void duhamel_at(const SourceFn& f, const std::vector<double>& sigma_nodes, double tau, const std::vector<double>& xi,
                const Scaling& s, const QuadratureOptions& q, std::vector<double>& x, std::vector<double>& dx) {
  std::vector<double> is, ic;
  oscillatory_integrals(f, sigma_nodes, tau, xi, s, q, &is, &ic);
  x.resize(xi.size());
  dx.resize(xi.size());
  for (size_t j = 0; j < xi.size(); ++j) {
    x[j] = -is[j] / std::sqrt(xi[j]);
    dx[j] = -ic[j];
  }
}

SpectralState duhamel(const SourceFn& f, const std::vector<double>& sigma_nodes, double tau, FreqPtr grid,
                      const Scaling& s, const QuadratureOptions& q) {
  SpectralState st;
  st.tau = tau;
  st.x = SpectralCoefficients::zeros(grid);
  st.dtau_x = SpectralCoefficients::zeros(grid);
  duhamel_at(f, sigma_nodes, tau, grid->xi, s, q, st.x.values, st.dtau_x.values);
  return st;
}

std::vector<SpectralState> duhamel_trajectory(const std::vector<double>& taus,
                                              const std::vector<SpectralCoefficients>& f, const Scaling& s,
                                              const QuadratureOptions& q) {
  if (taus.empty()) return {};
  SourceFn src = family_source(taus, f);
  FreqPtr grid = f.front().grid;
  std::vector<SpectralState> out;
  out.reserve(taus.size());
  for (double t : taus) out.push_back(duhamel(src, taus, t, grid, s, q));
  return out;
}

double characteristic_residual(const std::function<double(double, double)>& x_at, double tau, double xi,
                               double f_value, const Scaling& s, double dtau) {
  double mu = s.lambda(tau);
  mu = mu * mu * xi;
  auto y = [&](double t) {
    double l = s.lambda(t);
    return x_at(t, mu / (l * l)) / l;
  };
  double h = dtau;
  double ym2 = y(tau - 2 * h), ym1 = y(tau - h), y0 = y(tau), yp1 = y(tau + h), yp2 = y(tau + 2 * h);
  double d1 = (-yp2 + 8 * yp1 - 8 * ym1 + ym2) / (12 * h);
  double d2 = (-yp2 + 16 * yp1 - 30 * y0 + 16 * ym1 - ym2) / (12 * h * h);
  double l = s.lambda(tau);
  return l * (d2 + s.beta(tau) * d1 + xi * y0) + f_value;
}

//===----------------------------------------------------------------------===//
// Resonance equation
//===----------------------------------------------------------------------===//

std::pair<double, double> c_fundamental_exponents(double nu) {
  double b = 1 + 1 / nu;
  return {-b, 1 - 2 * b};
}

ParametrixValue c_parametrix(const std::function<double(double)>& r, double tau0, double tau, double nu) {
  ParametrixValue out;
  if (tau <= tau0) return out;
  using boost::math::quadrature::gauss_kronrod;
  const double b = 1 + 1 / nu;
  auto fa = [&](double sg) { return std::pow(sg / tau0, 1 + b) * r(sg); };
  auto fb = [&](double sg) { return std::pow(sg / tau0, 2 * b) * r(sg); };
  double A = gauss_kronrod<double, 31>::integrate(fa, tau0, tau, 20, 1e-13) / tau0;
  double B = gauss_kronrod<double, 31>::integrate(fb, tau0, tau, 20, 1e-13) / tau0;
  double u = tau / tau0;
  out.y = nu * tau0 * tau0 * (std::pow(u, -b) * A - std::pow(u, 1 - 2 * b) * B);
  out.dy = nu * tau0 * (-b * std::pow(u, -b - 1) * A + (2 * b - 1) * std::pow(u, -2 * b) * B);
  return out;
}

namespace {

// int_{x[i]}^{x[i+1]} of the quadratic through three neighbouring samples,
// averaged over the two available stencils
std::vector<double> cumulative_quadratic(const std::vector<double>& x, const std::vector<double>& f) {
  size_t n = x.size();
  std::vector<double> c(n, 0.0);
  if (n < 2) return c;
  auto piece = [&](size_t a, double lo, double hi) {
    // quadratic through a, a+1, a+2 integrated over [lo, hi] by 2-point Gauss (exact)
    const double g = 0.5 / std::sqrt(3.0);
    double mid = 0.5 * (lo + hi), half = hi - lo;
    double sum = 0;
    for (double z : {mid - g * half, mid + g * half}) {
      double x0 = x[a], x1 = x[a + 1], x2 = x[a + 2];
      double l0 = (z - x1) * (z - x2) / ((x0 - x1) * (x0 - x2));
      double l1 = (z - x0) * (z - x2) / ((x1 - x0) * (x1 - x2));
      double l2 = (z - x0) * (z - x1) / ((x2 - x0) * (x2 - x1));
      sum += l0 * f[a] + l1 * f[a + 1] + l2 * f[a + 2];
    }
    return 0.5 * half * sum;
  };
  for (size_t i = 0; i + 1 < n; ++i) {
    double v;
    if (n == 2) {
      v = 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    } else if (i == 0) {
      v = piece(0, x[0], x[1]);
    } else if (i + 2 >= n) {
      v = piece(n - 3, x[i], x[i + 1]);
    } else {
      v = 0.5 * (piece(i - 1, x[i], x[i + 1]) + piece(i, x[i], x[i + 1]));
    }
    c[i + 1] = c[i] + v;
  }
  return c;
}

}  // namespace

std::vector<ParametrixValue> c_parametrix(const std::vector<double>& taus, const std::vector<double>& r, double nu) {
  if (taus.size() != r.size()) throw std::invalid_argument("c_parametrix: size mismatch");
  std::vector<ParametrixValue> out(taus.size());
  if (taus.empty()) return out;
  const double b = 1 + 1 / nu, t0 = taus[0];
  std::vector<double> u(taus.size()), fa(taus.size()), fb(taus.size());
  for (size_t i = 0; i < taus.size(); ++i) {
    u[i] = taus[i] / t0;
    fa[i] = std::pow(u[i], 1 + b) * r[i];
    fb[i] = std::pow(u[i], 2 * b) * r[i];
  }
  auto A = cumulative_quadratic(u, fa);
  auto B = cumulative_quadratic(u, fb);
  for (size_t i = 1; i < taus.size(); ++i) {
    out[i].y = nu * t0 * t0 * (std::pow(u[i], -b) * A[i] - std::pow(u[i], 1 - 2 * b) * B[i]);
    out[i].dy = nu * t0 * (-b * std::pow(u[i], -b - 1) * A[i] + (2 * b - 1) * std::pow(u[i], -2 * b) * B[i]);
  }
  return out;
}

namespace {

ResonantState homogeneous_c(double c0, double c1, double tau0, double tau, const Scaling& s) {
  ResonantState st;
  st.tau = tau;
  if (s.is_static()) {
    st.c = c0 + c1 * (tau - tau0);
    st.c_prime = c1;
    return st;
  }
  double b = 1 + 1 / s.nu();
  double bq = (c1 * tau0 + b * c0) / (1 - b);
  double ap = c0 - bq;
  double u = tau / tau0;
  double pa = std::pow(u, -b), pb = std::pow(u, 1 - 2 * b);
  st.c = ap * pa + bq * pb;
  st.c_prime = (-b * ap * pa + (1 - 2 * b) * bq * pb) / tau;
  return st;
}

}  // namespace

std::vector<ResonantState> c_evolve(double c0, double c1, const std::vector<double>& taus,
                                    const std::vector<double>& h, const std::vector<double>& n, const Scaling& s) {
  if (taus.size() != h.size() || taus.size() != n.size()) throw std::invalid_argument("c_evolve: size mismatch");
  std::vector<ResonantState> out;
  if (taus.empty()) return out;
  std::vector<double> r(taus.size());
  for (size_t i = 0; i < taus.size(); ++i) {
    double l = s.lambda(taus[i]);
    r[i] = -h[i] - n[i] / (l * l);
  }
  std::vector<ParametrixValue> p(taus.size());
  if (s.is_static()) {
    // y = int (tau - sigma) r dsigma
    std::vector<double> sr(taus.size());
    for (size_t i = 0; i < taus.size(); ++i) sr[i] = taus[i] * r[i];
    auto I0 = cumulative_quadratic(taus, r);
    auto I1 = cumulative_quadratic(taus, sr);
    for (size_t i = 0; i < taus.size(); ++i) p[i] = {taus[i] * I0[i] - I1[i], I0[i]};
  } else {
    p = c_parametrix(taus, r, s.nu());
  }
  for (size_t i = 0; i < taus.size(); ++i) {
    ResonantState st = homogeneous_c(c0, c1, taus[0], taus[i], s);
    st.c += p[i].y;
    st.c_prime += p[i].dy;
    out.push_back(st);
  }
  return out;
}

ResonantState c_evolve(double c0, double c1, const std::function<double(double)>& h,
                       const std::function<double(double)>& n, double tau0, double tau, const Scaling& s) {
  ResonantState st = homogeneous_c(c0, c1, tau0, tau, s);
  if (tau <= tau0) return st;
  auto r = [&](double sg) {
    double l = s.lambda(sg);
    return -h(sg) - n(sg) / (l * l);
  };
  if (s.is_static()) {
    using boost::math::quadrature::gauss_kronrod;
    double I0 = gauss_kronrod<double, 31>::integrate(r, tau0, tau, 20, 1e-13);
    double I1 = gauss_kronrod<double, 31>::integrate([&](double sg) { return (tau - sg) * r(sg); }, tau0, tau, 20,
                                                     1e-13);
    st.c += I1;
    st.c_prime += I0;
  } else {
    ParametrixValue p = c_parametrix(r, tau0, tau, s.nu());
    st.c += p.y;
    st.c_prime += p.dy;
  }
  return st;
}

//===----------------------------------------------------------------------===//
// Phi and its iterates
//===----------------------------------------------------------------------===//

std::vector<SpectralCoefficients> apply_Phi(const std::vector<double>& taus,
                                            const std::vector<SpectralCoefficients>& f, const K0Operator& K0,
                                            const Scaling& s, const QuadratureOptions& q) {
  if (taus.size() != f.size()) throw std::invalid_argument("apply_Phi: one slice per tau node required");
  std::vector<SpectralCoefficients> g;
  g.reserve(f.size());
  for (size_t k = 0; k < f.size(); ++k) {
    SpectralCoefficients v = K0.apply_full(f[k]);
    v *= s.beta(taus[k]);
    g.push_back(std::move(v));
  }
  SourceFn src = family_source(taus, g);
  FreqPtr grid = f.front().grid;
  std::vector<SpectralCoefficients> out;
  out.reserve(taus.size());
  for (double t : taus) {
    SpectralCoefficients v = SpectralCoefficients::zeros(grid);
    oscillatory_integrals(src, taus, t, grid->xi, s, q, nullptr, &v.values);
    out.push_back(std::move(v));
  }
  return out;
}

double phi_weighted_norm(const std::vector<double>& taus, const std::vector<SpectralCoefficients>& g,
                         const Scaling& s, double kappa) {
  double l0 = s.lambda(taus.front()), best = 0;
  for (size_t k = 0; k < taus.size(); ++k) {
    double q = s.lambda(taus[k]) / l0;
    double lg = std::log(q);
    double w = q * std::pow(std::sqrt(1 + lg * lg), 1 + kappa / 2);
    best = std::max(best, w * s1_norm(g[k], kappa));
  }
  return best;
}

namespace {
std::vector<double> ratios_of(const std::vector<double>& v) {
  std::vector<double> r;
  for (size_t j = 1; j < v.size(); ++j) r.push_back(v[j - 1] > 0 ? v[j] / v[j - 1] : 0.0);
  return r;
}
}  // namespace

std::vector<double> PhiIterateReport::ratios() const { return ratios_of(norms); }
std::vector<double> PhiIterateReport::diag_ratios() const { return ratios_of(diag_norms); }

std::string PhiIterateReport::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "iterate,norm,ratio,diag_norm,diag_ratio\n";
  auto r = ratios(), rd = diag_ratios();
  for (size_t j = 0; j < norms.size(); ++j) {
    os << j << ',' << norms[j] << ',';
    if (j > 0) os << r[j - 1];
    os << ',' << (j < diag_norms.size() ? diag_norms[j] : 0.0) << ',';
    if (j > 0 && j - 1 < rd.size()) os << rd[j - 1];
    os << '\n';
  }
  return os.str();
}

PhiIterateReport iterate_Phi(const std::vector<double>& taus, const std::vector<SpectralCoefficients>& f, int k,
                             const K0Operator& K0_full, const K0Operator& K0_diag, const Scaling& s, double kappa,
                             const QuadratureOptions& q) {
  PhiIterateReport rep;
  auto g = f, gd = f;
  rep.norms.push_back(phi_weighted_norm(taus, g, s, kappa));
  rep.diag_norms.push_back(rep.norms.back());
  for (int j = 0; j < k; ++j) {
    g = apply_Phi(taus, g, K0_full, s, q);
    gd = apply_Phi(taus, gd, K0_diag, s, q);
    rep.norms.push_back(phi_weighted_norm(taus, g, s, kappa));
    rep.diag_norms.push_back(phi_weighted_norm(taus, gd, s, kappa));
  }
  return rep;
}

std::vector<double> geometric_taus(double tau0, double tau_end, double ratio) {
  if (!(ratio > 1) || !(tau_end >= tau0)) throw std::invalid_argument("geometric_taus: need ratio > 1, tau_end >= tau0");
  std::vector<double> t{tau0};
  while (t.back() * ratio < tau_end * (1 - 1e-12)) t.push_back(t.back() * ratio);
  if (tau_end > t.back() * (1 + 1e-12)) t.push_back(tau_end);
  return t;
}

}  // namespace wm
