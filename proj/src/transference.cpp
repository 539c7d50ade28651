#include "wmlab/transference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "wmlab/numerics.hpp"
#include "wmlab/profile.hpp"

namespace wm {

double eval_W_potential(WPotential p, double R) {
  return p == WPotential::commutator ? eval_W_commutator(R) : eval_W(R);
}

namespace {

// first and second R-derivatives of the two W variants
void W_derivs(WPotential p, double R, double& w1, double& w2) {
  double a = 1 + R * R;
  if (p == WPotential::commutator) {
    w1 = -32 * R / (a * a * a);
    w2 = -32 / (a * a * a) + 192 * R * R / (a * a * a * a);
  } else {
    double a3 = a * a * a, a4 = a3 * a, a5 = a4 * a;
    w1 = -64 * R / a3 + 192 * R / a4;
    w2 = -64 / a3 + 384 * R * R / a4 + 192 / a4 - 1536 * R * R / a5;
  }
}

double W_comm_fn(double R) { return eval_W_commutator(R); }
double W_disp_fn(double R) { return eval_W(R); }

}  // namespace

double KernelTable::diag_weight(double xi, double eta, int n) {
  double x = std::abs(xi / eta - 1);
  double a = 0.5 / n, b = 1.0 / n;
  if (x <= a) return 1;
  if (x >= b) return 0;
  return 1 - smoothstep5((x - a) / (b - a));
}

Eigen::MatrixXd KernelTable::diag_mask(int n) const {
  size_t m = freq->size();
  Eigen::MatrixXd out(m, m);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < m; ++j) out(i, j) = diag_weight(freq->xi[i], freq->xi[j], n);
  return out;
}

Eigen::MatrixXd tail_bilinear(const EigenbasisTable& basis, double (*w)(double)) {
  const auto& g = *basis.grid;
  size_t c = g.core_end(), N = g.size(), nx = basis.n_xi();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nx, nx);
  if (c + 1 >= N) return T;
  size_t M = N - c;
  // phase-amplitude variables psi = R^{1/2} phi = a sin(kR + th)
  Eigen::MatrixXd amp(M, nx), th(M, nx);
  std::vector<double> k(nx);
  for (size_t j = 0; j < nx; ++j) {
    k[j] = std::sqrt(basis.freq->xi[j]);
    double prev = 0;
    for (size_t m = 0; m < M; ++m) {
      size_t i = c + m;
      double R = g.R(i), sq = std::sqrt(R);
      double ph = basis.phi(i, j), dph = basis.dphi(i, j);
      double psi = sq * ph, dpsi = sq * (dph + ph / (2 * R));
      amp(m, j) = std::hypot(psi, dpsi / k[j]);
      double t = std::atan2(psi, dpsi / k[j]) - k[j] * R;
      if (m > 0) t += 2 * M_PI * std::round((prev - t) / (2 * M_PI));
      th(m, j) = t;
      prev = t;
    }
  }
  std::vector<double> R(M), wr(M), L(M);
  for (size_t m = 0; m < M; ++m) {
    R[m] = g.R(c + m);
    wr[m] = w(R[m]);
    if (m + 1 < M) L[m] = g.R(c + m + 1) - R[m];
  }
#pragma omp parallel for schedule(dynamic)
  for (long ii = 0; ii < long(nx); ++ii) {
    size_t i = size_t(ii);
    std::vector<double> P(M), pd(M), ps(M), sd(M), cd(M), ss(M), cs(M);
    for (size_t j = i; j < nx; ++j) {
      for (size_t m = 0; m < M; ++m) {
        P[m] = wr[m] * amp(m, i) * amp(m, j);
        pd[m] = (k[i] - k[j]) * R[m] + th(m, i) - th(m, j);
        ps[m] = (k[i] + k[j]) * R[m] + th(m, i) + th(m, j);
        sd[m] = std::sin(pd[m]); cd[m] = std::cos(pd[m]);
        ss[m] = std::sin(ps[m]); cs[m] = std::cos(ps[m]);
      }
      double acc = 0;
      for (size_t m = 0; m + 1 < M; ++m) {
        double a = filon_cos(P[m], P[m + 1], pd[m], pd[m + 1], sd[m], cd[m], sd[m + 1], cd[m + 1]);
        double b = filon_cos(P[m], P[m + 1], ps[m], ps[m + 1], ss[m], cs[m], ss[m + 1], cs[m + 1]);
        acc += 0.5 * L[m] * (a - b);
      }
      T(i, j) = acc;
      T(j, i) = acc;
    }
  }
  return T;
}

KernelTable build_kernel_F(const EigenbasisTable& basis, const KernelOptions& opt) {
  const auto& g = *basis.grid;
  size_t c = opt.tail ? g.core_end() : g.size() - 1;
  size_t nc = c + 1, nx = basis.n_xi();
  std::vector<double> wc = g.weights_upto(c);
  Eigen::VectorXd dw(nc), d1(nc), d2(nc);
  for (size_t i = 0; i < nc; ++i) {
    double R = g.R(i), w1, w2;
    W_derivs(opt.potential, R, w1, w2);
    dw(i) = wc[i] * eval_W_potential(opt.potential, R);
    d1(i) = wc[i] * 2 * w1;
    d2(i) = wc[i] * (w2 + w1 / R);
  }
  auto P = basis.phi.topRows(nc);
  auto dP = basis.dphi.topRows(nc);
  KernelTable t;
  t.freq = basis.freq;
  t.kind = KernelKind::F;
  t.potential = opt.potential == WPotential::commutator ? "commutator" : "displayed";
  t.rho = basis.rho;
  Eigen::MatrixXd direct = P.transpose() * dw.asDiagonal() * P;
  Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(nx, nx);
  if (opt.tail) tail = tail_bilinear(basis, opt.potential == WPotential::commutator ? W_comm_fn : W_disp_fn);
  t.values = direct + tail;
  t.ibp_used = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(nx, nx, false);
  // integration by parts for well separated high-frequency pairs
  Eigen::MatrixXd A = dP.transpose() * d1.asDiagonal() * P;
  Eigen::MatrixXd B = P.transpose() * d2.asDiagonal() * P;
  double Rc = g.R(c), Wc, w1c, w2c;
  Wc = eval_W_potential(opt.potential, Rc);
  W_derivs(opt.potential, Rc, w1c, w2c);
  const auto& xi = basis.freq->xi;
  for (size_t i = 0; i < nx; ++i)
    for (size_t j = 0; j < nx; ++j) {
      if (i == j) continue;
      if (xi[i] + xi[j] < opt.ibp_min_sum || std::abs(xi[i] / xi[j] - 1) < opt.ibp_min_sep) continue;
      double pi = basis.phi(c, i), pj = basis.phi(c, j), qi = basis.dphi(c, i), qj = basis.dphi(c, j);
      double bd = Wc * Rc * (pj * qi - pi * qj) + w1c * Rc * pi * pj;
      t.values(i, j) = (bd - A(i, j) - B(i, j)) / (xi[j] - xi[i]) + tail(i, j);
      t.ibp_used(i, j) = true;
    }
  return t;
}

KernelTable build_kernel_J(const EigenbasisTable& basis) {
  const auto& g = *basis.grid;
  size_t c = g.core_end(), nc = c + 1;
  std::vector<double> wc = g.weights_upto(c);
  Eigen::VectorXd du(nc);
  for (size_t i = 0; i < nc; ++i) du(i) = wc[i] * eval_U(g.R(i));
  Eigen::MatrixXd ds = basis.dstar_phi().topRows(nc);
  for (size_t j = 0; j < basis.n_xi(); ++j) ds.col(j) /= basis.freq->xi[j];
  KernelTable t;
  t.freq = basis.freq;
  t.kind = KernelKind::J;
  t.rho = basis.rho;
  t.values = basis.phi.topRows(nc).transpose() * du.asDiagonal() * ds;
  return t;
}

KernelTable build_kernel_Jtilde(const EigenbasisTable& basis) {
  const auto& g = *basis.grid;
  size_t c = g.core_end(), nc = c + 1, nx = basis.n_xi();
  std::vector<double> wc = g.weights_upto(c);
  Eigen::VectorXd du(nc);
  for (size_t i = 0; i < nc; ++i) du(i) = wc[i] * eval_U(g.R(i));
  Eigen::MatrixXd nr(nc, nx);
  for (size_t j = 0; j < nx; ++j) {
    std::vector<double> v(basis.n_r());
    for (size_t i = 0; i < v.size(); ++i) v[i] = basis.phi(i, j);
    RadialFunction f = right_inverse_phi(RadialFunction(basis.grid, std::move(v), 2));
    for (size_t i = 0; i < nc; ++i) nr(i, j) = f.values[i];
  }
  KernelTable t;
  t.freq = basis.freq;
  t.kind = KernelKind::Jtilde;
  t.rho = basis.rho;
  t.values = basis.phi.topRows(nc).transpose() * du.asDiagonal() * nr;
  return t;
}

//===----------------------------------------------------------------------===//
// Principal value operator
//===----------------------------------------------------------------------===//

K0Operator::K0Operator(const KernelTable& F, const K0Options& opt) : freq_(F.freq), opt_(opt) {
  build(F, {});
}

K0Operator::K0Operator(const KernelTable& F, std::function<double(double, double)> weight, const K0Options& opt)
    : freq_(F.freq), opt_(opt) {
  build(F, weight);
}

void K0Operator::build(const KernelTable& F, const std::function<double(double, double)>& weight) {
  if (F.kind != KernelKind::F) throw std::invalid_argument("K0: kernel must be of kind F");
  const auto& fg = *F.freq;
  const long n = long(fg.size());
  const double h = fg.h, u0 = fg.logxi[0];
  const long G = long(std::ceil(opt_.lower_tail_decades * std::log(10.0) / h));
  const int r = std::max(1, opt_.refine);
  const long Lw = opt_.window;
  const auto& rho = F.rho;
  m_ = Eigen::MatrixXd::Zero(n, n);
  // virtual node v = j + G covers j in [-G, n-1]
  const long nv = n + G;
  auto col = [&](long j) { return j < 0 ? 0L : j; };
  auto logrho = [&](long j) {
    if (j >= 0) return std::log(rho[size_t(j)]);
    double u = u0 + h * double(j);
    return std::log(rho[0]) + 2 * std::log(u0 / u);
  };
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const double xi = fg.xi[size_t(i)];
    auto Fi = [&](long j) { return F.values(i, col(j)); };
    auto chi = [&](double eta) { return weight ? weight(xi, eta) : 1.0; };
    std::vector<double> wts(size_t(nv), h);
    wts[0] = 0.5 * h;
    wts[size_t(nv - 1)] = 0.5 * h;
    struct Sub { double u, w; };
    std::vector<Sub> subs;
    if (r > 1) {
      for (long a = i - Lw; a < i + Lw; ++a) {
        if (a < -G || a + 1 > n - 1) continue;
        wts[size_t(a + G)] -= 0.5 * h;
        wts[size_t(a + 1 + G)] -= 0.5 * h;
        wts[size_t(a + G)] += 0.5 * h / r;
        wts[size_t(a + 1 + G)] += 0.5 * h / r;
        for (int m = 1; m < r; ++m) subs.push_back({u0 + h * (double(a) + double(m) / r), h / r});
      }
    }
    wts[size_t(i + G)] = 0;
    double uc = fg.logxi[size_t(i)];
    if (r == 1) {
      if (i - 1 >= -G) wts[size_t(i - 1 + G)] *= 1.5;
      if (i + 1 <= n - 1) wts[size_t(i + 1 + G)] *= 1.5;
    } else {
      for (auto& s : subs)
        if (std::abs(std::abs(s.u - uc) - h / r) < 1e-9 * h) s.w *= 1.5;
    }
    for (long v = 0; v < nv; ++v) {
      double w = wts[size_t(v)];
      if (w == 0) continue;
      long j = v - G;
      double eta = std::exp(u0 + h * double(j));
      double coef = w * eta * std::exp(logrho(j)) * Fi(j) * chi(eta) / (xi - eta);
      m_(i, col(j)) += coef;
    }
    for (const auto& s : subs) {
      double p = (s.u - u0) / h;  // position in node units, may be negative
      long b = std::clamp(long(std::floor(p)) - 1, -G, n - 4);
      double l[4];
      lagrange4(p - double(b), l);
      double lr = 0, fv = 0;
      for (int q = 0; q < 4; ++q) {
        lr += l[q] * logrho(b + q);
        fv += l[q] * Fi(b + q);
      }
      double eta = std::exp(s.u);
      double coef = s.w * eta * std::exp(lr) * fv * chi(eta) / (xi - eta);
      for (int q = 0; q < 4; ++q) m_(i, col(b + q)) += coef * l[q];
    }
  }
  // -xi rho'/rho from the measure
  d_.assign(size_t(n), 0.0);
  if (opt_.measure_diagonal) {
    SpectralCoefficients lr(F.freq, std::vector<double>(size_t(n)));
    for (long j = 0; j < n; ++j) lr.values[size_t(j)] = std::log(rho[size_t(j)]);
    SpectralCoefficients dl = xi_dxi(lr);
    for (long j = 0; j < n; ++j) {
      double xi = fg.xi[size_t(j)];
      d_[size_t(j)] = -dl.values[size_t(j)] * (weight ? weight(xi, xi) : 1.0);
    }
  }
}

SpectralCoefficients K0Operator::apply(const SpectralCoefficients& x) const {
  Eigen::Map<const Eigen::VectorXd> v(x.values.data(), Eigen::Index(x.size()));
  Eigen::VectorXd y = m_ * v;
  return SpectralCoefficients(freq_, std::vector<double>(y.data(), y.data() + y.size()));
}

SpectralCoefficients K0Operator::apply_full(const SpectralCoefficients& x) const {
  SpectralCoefficients y = apply(x);
  for (size_t j = 0; j < y.size(); ++j) y.values[j] += d_[j] * x.values[j];
  return y;
}

Eigen::MatrixXd K0Operator::full_matrix() const {
  Eigen::MatrixXd m = m_;
  for (size_t j = 0; j < d_.size(); ++j) m(Eigen::Index(j), Eigen::Index(j)) += d_[j];
  return m;
}

SpectralCoefficients K0Operator::apply_K(const SpectralCoefficients& x) const {
  SpectralCoefficients y = apply(x);
  for (size_t j = 0; j < y.size(); ++j) y.values[j] += (-2.0 + d_[j]) * x.values[j];
  return y;
}

SpectralCoefficients apply_K0(const SpectralCoefficients& x, const KernelTable& F) {
  return K0Operator(F).apply(x);
}

SpectralCoefficients apply_K(const SpectralCoefficients& x, const KernelTable& F) {
  return K0Operator(F).apply_K(x);
}

std::pair<K0Operator, K0Operator> split_diag(const KernelTable& F, int n, const K0Options& opt) {
  if (n < 2) throw std::invalid_argument("split_diag: n must be >= 2");
  auto d = [n](double xi, double eta) { return KernelTable::diag_weight(xi, eta, n); };
  auto nd = [n](double xi, double eta) { return 1.0 - KernelTable::diag_weight(xi, eta, n); };
  return {K0Operator(F, d, opt), K0Operator(F, nd, opt)};
}

SpectralCoefficients xi_dxi(const SpectralCoefficients& x) {
  size_t n = x.size();
  const auto& f = x.values;
  double h12 = 12 * x.grid->h;
  SpectralCoefficients out(x.grid, std::vector<double>(n));
  auto& o = out.values;
  for (size_t i = 2; i + 2 < n; ++i) o[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / h12;
  o[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / h12;
  o[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / h12;
  size_t a = n - 1, b = n - 2;
  o[a] = (25 * f[a] - 48 * f[a - 1] + 36 * f[a - 2] - 16 * f[a - 3] + 3 * f[a - 4]) / h12;
  o[b] = (3 * f[b + 1] + 10 * f[b] - 18 * f[b - 1] + 6 * f[b - 2] - f[b - 3]) / h12;
  return out;
}

double transference_residual(const RadialFunction& u, const EigenbasisTable& basis, const K0Operator& K) {
  const auto& g = *u.grid;
  double peak = 0;
  for (double v : u.values) peak = std::max(peak, std::abs(v));
  if (peak == 0) return 0.0;
  double rcut = 0.9 * g.spec().r_core;
  for (size_t i = 0; i < u.size(); ++i) {
    double R = g.R(i);
    if ((R < 1e-2 || R > rcut) && std::abs(u.values[i]) > 1e-10 * peak)
      throw std::invalid_argument("transference_residual: u must be supported away from 0 and R_max");
  }
  std::vector<double> du = g.d1(u.values);
  RadialFunction ru(u.grid, std::vector<double>(u.size()), 1);
  for (size_t i = 0; i < u.size(); ++i) ru.values[i] = g.R(i) * du[i];
  SpectralCoefficients lhs = forward_transform(ru, basis);
  SpectralCoefficients x = forward_transform(u, basis);
  SpectralCoefficients rhs = K.apply_K(x) - 2.0 * xi_dxi(x);
  return l2_rho(lhs - rhs, basis) / l2_rho(lhs, basis);
}

RadialFunction smooth_bump(GridPtr g, double center, double half_width) {
  return RadialFunction::sample(
      g,
      [=](double R) {
        double y = (R - center) / half_width;
        return std::abs(y) < 1 ? std::exp(-1 / (1 - y * y)) : 0.0;
      },
      2);
}

}  // namespace wm
