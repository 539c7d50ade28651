#include "wmlab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wmlab/numerics.hpp"

namespace wm {

//===----------------------------------------------------------------------===//
// Profile stand-in and cutoffs
//===----------------------------------------------------------------------===//

double light_cone_cutoff(double R, double tau, double nu) {
  double a = nu * tau;
  return 1.0 - smoothstep5((R - a) / a);
}

double inner_cutoff(double R, double tau, double nu) {
  double a = nu * tau / 4;
  return 1.0 - smoothstep5((R - a) / a);
}

double ProfileModel::correction(double tau, double R) const {
  if (mode == ProfileMode::Q_only) return 0.0;
  return amplitude * (R / (tau * tau)) * std::log1p(R * R) * light_cone_cutoff(R, tau, nu);
}

double ProfileModel::u(double tau, double R) const { return eval_Q(R) + correction(tau, R); }

//===----------------------------------------------------------------------===//
// Physical-side terms
//===----------------------------------------------------------------------===//

RadialFunction assemble_N(const RadialFunction& eps, double tau, const ProfileModel& profile) {
  const auto& g = *eps.grid;
  std::vector<double> out(eps.size(), 0.0);
  for (size_t i = 0; i < eps.size(); ++i) {
    double R = g.R(i), e = eps.values[i];
    double chi = light_cone_cutoff(R, tau, profile.nu);
    if (chi == 0.0) continue;
    double Q = eval_Q(R);
    double v1 = profile.correction(tau, R);
    double u = Q + v1;
    double R2 = R * R;
    // cos(2u) - cos(2Q) = -2 sin(2Q + v1) sin(v1)
    double t1 = v1 == 0.0 ? 0.0 : -2.0 * std::sin(2 * Q + v1) * std::sin(v1) / R2 * e;
    double se = std::sin(e);
    double t2 = -std::sin(2 * u) * se * se / R2;  // sin(2u)/(2R^2) (cos 2e - 1)
    double s3;
    if (std::abs(e) < 1e-3) {
      double e3 = e * e * e;
      s3 = -4.0 / 3.0 * e3 + 4.0 / 15.0 * e3 * e * e;
    } else {
      s3 = std::sin(2 * e) - 2 * e;
    }
    double t3 = std::cos(2 * u) / (2 * R2) * s3;
    out[i] = chi * (t1 + t2 + t3);
  }
  return RadialFunction(eps.grid, std::move(out), std::max(1, eps.origin_order));
}

RadialFunction assemble_R_terms(const RadialFunction& eps, const RadialFunction& Deps, const RadialFunction& adv,
                                double tau, const Scaling& s) {
  if (eps.size() != adv.size() || eps.size() != Deps.size())
    throw std::invalid_argument("assemble_R_terms: inputs must share a grid");
  const auto& g = *eps.grid;
  double b = s.beta(tau), db = s.dbeta(tau);
  std::vector<double> out(eps.size());
  for (size_t i = 0; i < eps.size(); ++i) {
    double R = g.R(i), R2 = R * R;
    double U = eval_U(R);
    double dU = -4.0 * (1 - 3 * R2) / std::pow(1 + R2, 3);
    out[i] = (db + 2 * b * b) * U * eps.values[i] + 2 * b * U * adv.values[i] + b * b * R * dU * eps.values[i];
  }
  return RadialFunction(eps.grid, std::move(out), std::min(eps.origin_order, adv.origin_order) + 1);
}

//===----------------------------------------------------------------------===//
// Fourier-side right-hand side
//===----------------------------------------------------------------------===//

void EvolutionContext::prepare() {
  if (!K0) throw std::invalid_argument("EvolutionContext: K0 not set");
  if (commutator.size() != 0) return;
  auto freq = K0->freq();
  const Eigen::Index n = Eigen::Index(freq->size());
  Eigen::MatrixXd Dx(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    SpectralCoefficients e = SpectralCoefficients::zeros(freq);
    e.values[size_t(j)] = 1.0;
    SpectralCoefficients d = xi_dxi(e);
    for (Eigen::Index i = 0; i < n; ++i) Dx(i, j) = d.values[size_t(i)];
  }
  Eigen::MatrixXd M = K0->full_matrix();
  commutator = Dx * M - M * Dx;
}

namespace {

SpectralCoefficients matvec(const Eigen::MatrixXd& M, const SpectralCoefficients& x) {
  Eigen::Map<const Eigen::VectorXd> v(x.values.data(), Eigen::Index(x.size()));
  Eigen::VectorXd y = M * v;
  return SpectralCoefficients(x.grid, std::vector<double>(y.data(), y.data() + y.size()));
}

}  // namespace

SpectralCoefficients assemble_nonlocal(const SpectralState& st, double tau, const EvolutionContext& ctx,
                                       NonlocalParts* parts) {
  const auto& K0 = *ctx.K0;
  double b = ctx.scaling.beta(tau), db = ctx.scaling.dbeta(tau);
  SpectralCoefficients kd = K0.apply_full(st.dtau_x);
  SpectralCoefficients kx = K0.apply_full(st.x);
  SpectralCoefficients kkx = K0.apply_full(kx);
  SpectralCoefficients cx = ctx.commutator.size() ? matvec(ctx.commutator, st.x) : SpectralCoefficients::zeros(st.x.grid);
  NonlocalParts p;
  p.k0_dtau = (2 * b) * kd;
  p.dbeta_k0 = db * kx;
  // beta [D_tau, K0] = beta [-2 beta xi d_xi, K0]
  p.commutator = (-2 * b * b) * cx;
  p.k0_squared = (b * b) * kkx;
  p.k0_beta2 = (b * b) * kx;
  SpectralCoefficients f = p.k0_dtau + p.dbeta_k0 + p.commutator + p.k0_squared + p.k0_beta2;
  if (parts) *parts = std::move(p);
  return f;
}

RadialFunction reconstruct_epsilon(const SpectralState& st, const ResonantState& res, const EigenbasisTable& basis) {
  RadialFunction v = inverse_transform(st.x, basis);
  RadialFunction e = right_inverse_phi(v);
  if (res.c != 0.0) {
    for (size_t i = 0; i < e.size(); ++i) e.values[i] += res.c * eval_phi0(basis.grid->R(i));
    e.origin_order = 1;
  }
  return e;
}

RadialFunction advective_epsilon(const SpectralState& st, const ResonantState& res, const RadialFunction& eps,
                                 double tau, const EvolutionContext& ctx) {
  const auto& basis = *ctx.basis;
  double b = ctx.scaling.beta(tau);
  // F((d_tau + beta R d_R + beta) D eps) = (D_tau + beta K0) x
  SpectralCoefficients y = st.dtau_x + b * ctx.K0->apply_full(st.x);
  RadialFunction g = inverse_transform(y, basis);
  // D(adv eps) = (adv + beta) D eps + beta U eps
  for (size_t i = 0; i < g.size(); ++i) g.values[i] += b * eval_U(basis.grid->R(i)) * eps.values[i];
  RadialFunction a = right_inverse_phi(g);
  double k = res.c_prime + b * res.c;
  if (k != 0.0) {
    for (size_t i = 0; i < a.size(); ++i) a.values[i] += k * eval_phi0(basis.grid->R(i));
    a.origin_order = 1;
  }
  return a;
}

SpectralCoefficients assemble_rhs_fourier(const SpectralState& st, const ResonantState& res, double tau,
                                          const EvolutionContext& ctx, NonlocalParts* parts) {
  const auto& basis = *ctx.basis;
  SpectralCoefficients f = assemble_nonlocal(st, tau, ctx, parts);
  RadialFunction eps = reconstruct_epsilon(st, res, basis);
  RadialFunction v = inverse_transform(st.x, basis);
  RadialFunction adv = advective_epsilon(st, res, eps, tau, ctx);
  RadialFunction N = assemble_N(eps, tau, ctx.profile);
  RadialFunction DN = apply_D(N);
  RadialFunction Rt = assemble_R_terms(eps, v, adv, tau, ctx.scaling);
  RadialFunction phys = DN;
  for (size_t i = 0; i < phys.size(); ++i)
    phys.values[i] += light_cone_cutoff(basis.grid->R(i), tau, ctx.profile.nu) * Rt.values[i];
  f += forward_transform(phys, basis);
  return f;
}

//===----------------------------------------------------------------------===//
// Resonance sources
//===----------------------------------------------------------------------===//

double extract_h(const SpectralCoefficients& x, const EigenbasisTable& basis, bool* tail_flag) {
  const auto& fw = basis.freq->w;
  size_t n = x.size();
  double total = 0, tail = 0;
  for (size_t j = 0; j < n; ++j) {
    double t = x.values[j] * basis.rho[j] * fw[j] * basis.c2[j];
    total += t;
    if (j >= n - n / 10) tail += std::abs(t);
  }
  if (tail_flag) *tail_flag = tail > 1e-2 * std::abs(total) && tail > 0;
  return -4.0 * total;
}

namespace {

// least-squares value at R = 0 of a + b R^2 + c R^4 through (R_i, y_i)
double fit_origin(const std::vector<double>& R, const std::vector<double>& y, int terms) {
  const Eigen::Index m = Eigen::Index(R.size());
  Eigen::MatrixXd A(m, terms);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double r2 = R[size_t(i)] * R[size_t(i)], p = 1;
    for (int k = 0; k < terms; ++k, p *= r2) A(i, k) = p;
    b(i) = y[size_t(i)];
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return c(0);
}

}  // namespace

double extract_h_direct(const SpectralCoefficients& x, const EigenbasisTable& basis) {
  RadialFunction v = inverse_transform(x, basis);
  RadialFunction w = apply_Dstar(v);
  std::vector<double> R, y;
  const double kmax = std::sqrt(basis.freq->xi.back());
  // window where xi_max R^2 stays small
  double hi = std::min(4e-3, 0.15 / kmax), lo = hi / 4;
  for (size_t i = 0; i < w.size(); ++i) {
    double r = basis.grid->R(i);
    if (r >= lo && r <= hi) {
      R.push_back(r);
      y.push_back(w.values[i] / r);
    }
  }
  if (R.size() < 6) throw std::runtime_error("extract_h_direct: too few nodes near the origin");
  return fit_origin(R, y, 3);
}

double extract_n(const RadialFunction& eps, double tau, const ProfileModel& profile) {
  RadialFunction N = assemble_N(eps, tau, profile);
  std::vector<double> R, y;
  for (size_t i = 0; i < 4 && i < N.size(); ++i) {
    R.push_back(N.grid->R(i));
    y.push_back(N.values[i] / R.back());
  }
  return fit_origin(R, y, 2);
}

//===----------------------------------------------------------------------===//
// Iteration
//===----------------------------------------------------------------------===//

double IterationData::norm(double kappa) const {
  double n = std::abs(c0) + std::abs(c1);
  if (x0.grid) n += s0_norm(x0, kappa);
  if (x1.grid) n += s1_norm(x1, kappa);
  return n;
}

namespace {

double decay_weight(double tau, double tau0, const Scaling& s, double kappa) {
  double q = s.lambda(tau) / s.lambda(tau0);
  double lg = std::log(q);
  return q * std::pow(std::sqrt(1 + lg * lg), 1 + kappa / 2);
}

}  // namespace

double increment_norm(const Trajectory& a, const Trajectory& b, const Scaling& s, double kappa) {
  double best = 0;
  for (size_t k = 0; k < a.taus.size(); ++k) {
    double t = a.taus[k];
    double v = s0_norm(a.x[k].x - b.x[k].x, kappa) + std::abs(a.c[k].c - b.c[k].c) / (t * t) +
               std::abs(a.c[k].c_prime - b.c[k].c_prime) / t;
    best = std::max(best, decay_weight(t, a.taus.front(), s, kappa) * v);
  }
  return best;
}

Trajectory zeroth_iterate(const IterationData& data, const std::vector<double>& taus, const Scaling& s) {
  Trajectory tr;
  tr.taus = taus;
  for (double t : taus) tr.x.push_back(free_evolve(data.x0, data.x1, taus.front(), t, s));
  std::vector<double> zero(taus.size(), 0.0);
  tr.c = c_evolve(data.c0, data.c1, taus, zero, zero, s);
  return tr;
}

StepResult iterate_step(const Trajectory& prev, const IterationData& data, const EvolutionContext& ctx,
                        const EvolutionConfig& cfg) {
  const auto& taus = prev.taus;
  const size_t nt = taus.size();
  StepResult out;
  std::vector<SpectralCoefficients> f(nt);
  out.h.resize(nt);
  out.n.resize(nt);
  for (size_t k = 0; k < nt; ++k) {
    f[k] = assemble_rhs_fourier(prev.x[k], prev.c[k], taus[k], ctx);
    out.h[k] = extract_h(prev.x[k].x, *ctx.basis);
    RadialFunction eps = reconstruct_epsilon(prev.x[k], prev.c[k], *ctx.basis);
    out.n[k] = extract_n(eps, taus[k], ctx.profile);
  }
  Trajectory base = zeroth_iterate(data, taus, ctx.scaling);
  std::vector<SpectralState> duh = duhamel_trajectory(taus, f, ctx.scaling, cfg.quad);
  out.next.taus = taus;
  for (size_t k = 0; k < nt; ++k) {
    SpectralState st = base.x[k];
    st.x += duh[k].x;
    st.dtau_x += duh[k].dtau_x;
    out.next.x.push_back(std::move(st));
  }
  // the rescaled nonlinearity already carries lambda^{-2}, so it enters next to h
  std::vector<double> src(nt), zero(nt, 0.0);
  for (size_t k = 0; k < nt; ++k) src[k] = out.h[k] + out.n[k];
  out.next.c = c_evolve(data.c0, data.c1, taus, src, zero, ctx.scaling);
  out.increment = increment_norm(out.next, prev, ctx.scaling, cfg.params.kappa);
  return out;
}

EvolutionResult run_iteration(const IterationData& data, EvolutionContext& ctx, const EvolutionConfig& cfg) {
  cfg.params.validate();
  ctx.prepare();
  const double kappa = cfg.params.kappa;
  const double tau0 = cfg.params.tau0;
  EvolutionResult res;
  res.data_norm = data.norm(kappa);
  if (res.data_norm > cfg.delta0 * (1 + 1e-12))
    throw std::invalid_argument("run_iteration: data norm " + std::to_string(res.data_norm) + " exceeds delta0");
  std::vector<double> taus = geometric_taus(tau0, cfg.tau_end, cfg.tau_ratio);
  Trajectory cur = zeroth_iterate(data, taus, ctx.scaling);
  std::vector<double> h, n;
  res.status = "max_iter reached without meeting the tolerance";
  for (int j = 0; j < cfg.max_iter; ++j) {
    StepResult st = iterate_step(cur, data, ctx, cfg);
    res.increments.push_back(st.increment);
    cur = std::move(st.next);
    h = std::move(st.h);
    n = std::move(st.n);
    if (!std::isfinite(st.increment) || st.increment > cfg.abort_factor * std::max(res.data_norm, 1e-300)) {
      res.status = "aborted: increment norm " + std::to_string(st.increment) + " exceeds the blowup threshold";
      break;
    }
    if (st.increment <= cfg.tol * res.data_norm) {
      res.converged = true;
      res.status = "converged";
      break;
    }
  }
  res.trajectory = cur;
  res.h = h;
  res.n = n;
  const auto& s = ctx.scaling;
  double s00 = taus.empty() ? 0 : s0_norm(cur.x[0].x, kappa);
  for (size_t k = 0; k < taus.size(); ++k) {
    double t = taus[k];
    double s0 = s0_norm(cur.x[k].x, kappa);
    res.s0_norms.push_back(s0);
    double q = s.lambda(t) / s.lambda(tau0), lg = std::log(q);
    double pred = s00 / q * std::pow(std::sqrt(1 + lg * lg), -1 - kappa / 2);
    res.tracking_ratio.push_back(pred > 0 ? s0 / pred : 0.0);
    RadialFunction eps = reconstruct_epsilon(cur.x[k], cur.c[k], *ctx.basis);
    RadialFunction adv = advective_epsilon(cur.x[k], cur.c[k], eps, t, ctx);
    res.light_cone_energy.push_back(local_energy(eps, adv, cfg.params.nu * t));
  }
  return res;
}

nlohmann::json EvolutionResult::summary() const {
  nlohmann::json j;
  j["converged"] = converged;
  j["status"] = status;
  j["data_norm"] = data_norm;
  j["increments"] = increments;
  if (!tracking_ratio.empty()) {
    auto [mn, mx] = std::minmax_element(tracking_ratio.begin(), tracking_ratio.end());
    j["tracking_ratio_min"] = *mn;
    j["tracking_ratio_max"] = *mx;
  }
  if (!light_cone_energy.empty()) {
    j["light_cone_energy_first"] = light_cone_energy.front();
    j["light_cone_energy_last"] = light_cone_energy.back();
  }
  return j;
}

void EvolutionResult::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream os(fs::path(dir) / "norms.csv");
    os.precision(12);
    os << "iterate,increment,ratio\n";
    for (size_t j = 0; j < increments.size(); ++j) {
      os << j + 1 << ',' << increments[j] << ',';
      if (j > 0 && increments[j - 1] > 0) os << increments[j] / increments[j - 1];
      os << '\n';
    }
  }
  {
    std::ofstream os(fs::path(dir) / "trajectory.csv");
    os.precision(12);
    os << "tau,s0,tracking_ratio,c,c_prime,light_cone_energy,h,n\n";
    const auto& t = trajectory.taus;
    for (size_t k = 0; k < t.size(); ++k) {
      os << t[k] << ',' << s0_norms[k] << ',' << tracking_ratio[k] << ',' << trajectory.c[k].c << ','
         << trajectory.c[k].c_prime << ',' << light_cone_energy[k] << ',' << (k < h.size() ? h[k] : 0.0) << ','
         << (k < n.size() ? n[k] : 0.0) << '\n';
    }
  }
  {
    std::ofstream os(fs::path(dir) / "xbar.csv");
    os.precision(10);
    os << "tau,xi,x,dtau_x\n";
    for (size_t k = 0; k < trajectory.taus.size(); ++k) {
      const auto& st = trajectory.x[k];
      for (size_t j = 0; j < st.x.size(); ++j)
        os << trajectory.taus[k] << ',' << st.x.grid->xi[j] << ',' << st.x.values[j] << ',' << st.dtau_x.values[j]
           << '\n';
    }
  }
  std::ofstream(fs::path(dir) / "report.json") << summary().dump(2) << '\n';
}

}  // namespace wm
