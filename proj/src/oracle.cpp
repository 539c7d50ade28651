#include "wmlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/minima.hpp>

#include "wmlab/profile.hpp"
#include "wmlab/propagators.hpp"

namespace wm {

namespace {

// cos(2 Q(x)) with Q = 2 arctan
double cos2Q(double x) {
  double x2 = x * x;
  return (1.0 - 6.0 * x2 + x2 * x2) / ((1.0 + x2) * (1.0 + x2));
}

// normalised bump exp(1 - 1/(1 - y^2)), height 1 at the centre
double unit_bump(double r, double center, double half_width) {
  double y = (r - center) / half_width;
  if (std::abs(y) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

void check_state(const PhysicalState& s) {
  if (!s.u.grid || !s.ut.grid || s.u.size() != s.ut.size())
    throw std::invalid_argument("fd_evolve: u and u_t must share a grid");
  if (s.u.origin_order < 1) throw std::invalid_argument("fd_evolve: u must vanish at the origin (origin_order >= 1)");
  const auto& r = s.u.grid->nodes();
  double dr = r[1] - r[0];
  if (std::abs(r[0] - 0.5 * dr) > 1e-9 * dr) throw std::invalid_argument("fd_evolve: grid is not staggered");
}

// acc = u_rr + u_r / r - V(t, r, u) on every node but the last
using Potential = std::function<double(double, double, double)>;

void accel(const std::vector<double>& r, double dr, const std::vector<double>& u, double t, const Potential& V,
           std::vector<double>& acc) {
  const size_t n = u.size();
  const double idr2 = 1.0 / (dr * dr);
  for (size_t i = 0; i + 1 < n; ++i) {
    double rp = r[i] + 0.5 * dr, rm = r[i] - 0.5 * dr;
    double left = i == 0 ? 0.0 : rm * (u[i] - u[i - 1]);
    acc[i] = (rp * (u[i + 1] - u[i]) - left) * idr2 / r[i] - V(t, r[i], u[i]);
  }
  acc[n - 1] = 0.0;
}

FdTrajectory leapfrog(const PhysicalState& state, double t_end, const FdOptions& opt, const Potential& V) {
  check_state(state);
  if (!(opt.cfl > 0) || opt.cfl > 0.5) throw std::invalid_argument("fd_evolve: cfl must lie in (0, 0.5]");
  const auto g = state.u.grid;
  const auto& r = g->nodes();
  const size_t n = r.size();
  const double dr = r[1] - r[0];
  FdTrajectory out;
  out.snapshots.push_back(state);
  double span = t_end - state.t;
  if (span == 0) return out;
  size_t steps = size_t(std::ceil(std::abs(span) / (opt.cfl * dr) - 1e-12));
  const double dt = span / double(steps);
  out.dt = dt;
  auto bg = [&](double t, double rr) { return opt.background ? opt.background(t, rr) : 0.0; };

  std::vector<double> prev = state.u.values, cur(n), next(n), acc(n);
  accel(r, dr, prev, state.t, V, acc);
  for (size_t i = 0; i < n; ++i) cur[i] = prev[i] + dt * state.ut.values[i] + 0.5 * dt * dt * acc[i];
  auto outgoing = [&](const std::vector<double>& u, double t, double t_new) {
    // first-order outgoing condition for the deviation from the background
    double vl = u[n - 1] - bg(t, r[n - 1]), vp = u[n - 2] - bg(t, r[n - 2]);
    double vn = vl - std::abs(dt) * ((vl - vp) / dr + vl / (2.0 * r[n - 1]));
    return vn + bg(t_new, r[n - 1]);
  };
  cur[n - 1] = outgoing(prev, state.t, state.t + dt);

  const int every = opt.snapshot_every > 0 ? opt.snapshot_every : int(steps);
  PhysicalState healthy = state;
  for (size_t k = 1; k <= steps; ++k) {
    double t = state.t + dt * double(k);
    accel(r, dr, cur, t, V, acc);
    bool finite = true;
    for (size_t i = 0; i < n; ++i)
      if (!std::isfinite(cur[i])) finite = false;
    if (!finite) {
      out.status = "nan";
      if (out.snapshots.back().t != healthy.t) out.snapshots.push_back(healthy);
      out.steps = k;
      return out;
    }
    bool snap = (k % size_t(every) == 0) || k == steps;
    PhysicalState s;
    if (snap || k % 16 == 0) {
      s.t = t;
      std::vector<double> ut(n);
      for (size_t i = 0; i < n; ++i) ut[i] = (cur[i] - prev[i]) / dt + 0.5 * dt * acc[i];
      s.u = RadialFunction(g, cur, state.u.origin_order);
      s.ut = RadialFunction(g, std::move(ut), state.ut.origin_order);
      healthy = s;
    }
    if (snap) {
      out.snapshots.push_back(s);
      if (opt.stop && opt.stop(s)) {
        out.status = "stopped";
        out.steps = k;
        return out;
      }
    }
    if (k == steps) break;
    for (size_t i = 0; i + 1 < n; ++i) next[i] = 2.0 * cur[i] - prev[i] + dt * dt * acc[i];
    next[n - 1] = outgoing(cur, t, t + dt);
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  out.steps = steps;
  return out;
}

}  // namespace

GridPtr staggered_grid(double r_max, size_t n) {
  double dr = r_max / double(n);
  return RadialGrid::uniform(0.5 * dr, dr, n);
}

double staggered_dr(const RadialGrid& g) { return g.R(1) - g.R(0); }

FdTrajectory fd_evolve(const PhysicalState& state, double t_end, const FdOptions& opt) {
  Potential V = [](double, double r, double u) { return std::sin(2.0 * u) / (2.0 * r * r); };
  return leapfrog(state, t_end, opt, V);
}

FdTrajectory fd_linearized_evolve(const PhysicalState& state, const std::function<double(double)>& lambda,
                                  double t_end, const FdOptions& opt) {
  Potential V = [&lambda](double t, double r, double e) { return cos2Q(lambda(t) * r) / (r * r) * e; };
  return leapfrog(state, t_end, opt, V);
}

double fd_energy(const PhysicalState& s, double radius) {
  const auto& r = s.u.grid->nodes();
  const auto& u = s.u.values;
  const auto& ut = s.ut.values;
  const double dr = r[1] - r[0];
  double e = 0;
  for (size_t i = 0; i < r.size(); ++i) {
    if (radius > 0 && r[i] > radius) break;
    double su = std::sin(u[i]);
    e += (0.5 * ut[i] * ut[i] + su * su / (2.0 * r[i] * r[i])) * r[i] * dr;
    if (i + 1 < r.size() && (radius <= 0 || r[i + 1] <= radius)) {
      double ur = (u[i + 1] - u[i]) / dr;
      e += 0.5 * ur * ur * (r[i] + 0.5 * dr) * dr;
    }
  }
  return e;
}

double staggered_value(const RadialFunction& f, double r, double outside) {
  const auto& g = *f.grid;
  const double dr = staggered_dr(g);
  const size_t n = f.size();
  if (r > g.R(n - 1)) return outside;
  // local spline on a window of nodes around r with the odd extension
  const int m = 6;
  long c = long(std::floor(std::abs(r) / dr - 0.5));
  std::vector<double> v;
  long lo = c - m;
  for (long i = lo; i <= c + m + 1; ++i) {
    if (i >= 0) v.push_back(i < long(n) ? f.values[size_t(i)] : f.values[n - 1]);
    else v.push_back(-f.values[size_t(-i - 1)]);
  }
  boost::math::interpolators::cardinal_cubic_b_spline<double> sp(v.begin(), v.end(), (double(lo) + 0.5) * dr, dr);
  double y = sp(std::abs(r));
  return r < 0 ? -y : y;
}

RadialFunction resample(const RadialFunction& f, GridPtr g, double scale, int origin_order) {
  std::vector<double> v(g->size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = staggered_value(f, g->R(i) / scale);
  return RadialFunction(std::move(g), std::move(v), origin_order);
}

//===----------------------------------------------------------------------===//
// Modulation diagnostics
//===----------------------------------------------------------------------===//

ScaleFit extract_scale(const RadialFunction& u) {
  ScaleFit fit;
  const auto& r = u.grid->nodes();
  const auto& v = u.values;
  // first guess from the crossing Q(lambda r) = pi / 2, i.e. lambda r = 1
  size_t k = 0;
  while (k < v.size() && v[k] < M_PI / 2) ++k;
  if (k == 0 || k == v.size()) {
    fit.message = "not profile-shaped: u never crosses pi/2";
    return fit;
  }
  double rc = r[k - 1] + (M_PI / 2 - v[k - 1]) / (v[k] - v[k - 1]) * (r[k] - r[k - 1]);
  double lam = 1.0 / rc;
  auto misfit = [&](double l, double window, double* rel) {
    double num = 0, den = 0;
    for (size_t i = 0; i < r.size() && r[i] <= window; ++i) {
      double w = r[i] * (i + 1 < r.size() ? r[i + 1] - r[i] : r[i] - r[i - 1]);
      double q = eval_Q(l * r[i]);
      num += w * (v[i] - q) * (v[i] - q);
      den += w * q * q;
    }
    if (rel) *rel = den > 0 ? std::sqrt(num / den) : INFINITY;
    return num;
  };
  for (int round = 0; round < 3; ++round) {
    double window = 1.0 / (2.0 * lam);
    auto f = [&](double ll) { return misfit(std::exp(ll), window, nullptr); };
    auto best = boost::math::tools::brent_find_minima(f, std::log(lam / 2), std::log(lam * 2), 40);
    lam = std::exp(best.first);
  }
  size_t inside = 0;
  while (inside < r.size() && r[inside] <= 1.0 / (2.0 * lam)) ++inside;
  if (inside < 4) {
    fit.lambda = lam;
    fit.message = "not profile-shaped: fewer than four nodes in the fit window";
    return fit;
  }
  misfit(lam, 1.0 / (2.0 * lam), &fit.residual);
  fit.lambda = lam;
  fit.profile_shaped = fit.residual <= 0.2;
  fit.message = fit.profile_shaped ? "ok" : "not profile-shaped: fit residual above 20%";
  return fit;
}

nlohmann::json ProbeReport::to_json() const {
  nlohmann::json j;
  j["t"] = t;
  j["lambda_hat"] = lambda_hat;
  j["tracking"] = tracking;
  j["fit_residual"] = fit_residual;
  j["light_cone_energy"] = light_cone_energy;
  j["max_tracking_deviation"] = max_tracking_deviation;
  j["energy_monotone"] = energy_monotone;
  j["status"] = status;
  if (t.size() >= 2) {
    // fitted exponent of lambda_hat against t, to compare with -1 - nu
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < t.size(); ++i) {
      double x = std::log(t[i]), y = std::log(lambda_hat[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    double m = double(t.size());
    j["lambda_exponent"] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return j;
}

ProbeReport stability_probe(const ProbeOptions& opt) {
  if (!(opt.delta0 >= 0) || opt.delta0 > 1e-2) throw std::invalid_argument("stability_probe: delta0 must lie in [0, 1e-2]");
  if (!(opt.t0 > 0)) throw std::invalid_argument("stability_probe: t0 must be positive");
  const double nu = opt.nu, t0 = opt.t0;
  ScalingMap map(nu);
  auto g = staggered_grid(opt.r_max, opt.n_r);
  const double dr = staggered_dr(*g);
  const double l0 = map.lambda_t(t0);
  const double dl0 = -(1.0 + nu) * l0 / t0;
  PhysicalState s;
  s.t = t0;
  s.u = RadialFunction::sample(
      g, [&](double r) { return eval_Q(l0 * r) + opt.delta0 * unit_bump(r, t0 / 2, t0 / 4); }, 1);
  s.ut = RadialFunction::sample(
      g,
      [&](double r) {
        double x = l0 * r;
        return 2.0 / (1.0 + x * x) * dl0 * r + opt.delta0 / t0 * unit_bump(r, t0 / 2, t0 / 4);
      },
      1);

  ProbeReport rep;
  auto record = [&](const PhysicalState& st) {
    ScaleFit f = extract_scale(st.u);
    double track = f.lambda * std::pow(st.t, 1.0 + nu);
    rep.t.push_back(st.t);
    rep.lambda_hat.push_back(f.lambda);
    rep.tracking.push_back(track);
    rep.fit_residual.push_back(f.residual);
    rep.light_cone_energy.push_back(fd_energy(st, std::abs(st.t)));
    return f;
  };
  record(s);
  FdOptions fo;
  fo.cfl = opt.cfl;
  double t_end = t0 / 2;
  size_t steps = size_t(std::ceil(std::abs(t_end - t0) / (opt.cfl * dr) - 1e-12));
  fo.snapshot_every = std::max(1, int(steps / size_t(std::max(1, opt.samples))));
  fo.background = [&](double, double r) { return eval_Q(l0 * r); };
  bool under_resolved = false;
  fo.stop = [&](const PhysicalState& st) {
    ScaleFit f = record(st);
    if (f.lambda * dr > opt.resolution_stop) {
      under_resolved = true;
      return true;
    }
    return false;
  };
  FdTrajectory tr = fd_evolve(s, t_end, fo);
  double ref = rep.tracking.front();
  for (double& v : rep.tracking) {
    v /= ref;
    rep.max_tracking_deviation = std::max(rep.max_tracking_deviation, std::abs(v - 1.0));
  }
  rep.energy_monotone = true;
  for (size_t i = 1; i < rep.light_cone_energy.size(); ++i)
    if (!(rep.light_cone_energy[i] < rep.light_cone_energy[i - 1])) rep.energy_monotone = false;
  if (tr.status == "nan") rep.status = "aborted: non-finite values";
  else if (under_resolved) rep.status = "stopped: profile under-resolved (lambda_hat dr > " + std::to_string(opt.resolution_stop) + ")";
  else rep.status = "ok";
  return rep;
}

//===----------------------------------------------------------------------===//
// Cross-validation
//===----------------------------------------------------------------------===//

nlohmann::json OracleCompareReport::to_json() const {
  nlohmann::json j;
  j["times"] = times;
  j["errors"] = errors;
  j["quarter_period"] = quarter_period;
  j["dominant_xi"] = dominant_xi;
  j["max_error"] = max_error;
  return j;
}

OracleCompareReport oracle_compare(const EigenbasisTable& basis, const K0Operator* K0,
                                   const OracleCompareOptions& opt) {
  const double nu = opt.nu, t0 = opt.static_background ? 0.0 : opt.t0;
  // lambda(t0) = 1 so that R = r at the initial time
  const double norm = std::pow(opt.t0, 1.0 + nu);
  ScalingMap map(nu, norm);
  Scaling sc = opt.static_background ? Scaling::frozen(1.0) : Scaling::power(nu, norm);
  auto lambda_t = [&](double t) { return opt.static_background ? 1.0 : map.lambda_t(t); };
  auto tau_of = [&](double t) { return opt.static_background ? t : map.tau_of_t(t); };

  auto fg = staggered_grid(opt.r_max, opt.n_r);
  PhysicalState s;
  s.t = t0;
  s.u = RadialFunction::sample(
      fg, [&](double r) { return unit_bump(r, opt.bump_center, opt.bump_width); }, 1);
  s.ut = RadialFunction::sample(fg, [](double) { return 0.0; }, 1);

  // matched spectral data
  GridPtr bg = basis.grid;
  RadialFunction eps0 = RadialFunction::sample(
      bg, [&](double R) { return unit_bump(R, opt.bump_center, opt.bump_width); }, 1);
  SpectralCoefficients x0 = forward_transform(apply_D(eps0), basis);
  SpectralCoefficients x1 = SpectralCoefficients::zeros(basis.freq);
  const double tau0 = tau_of(t0);
  if (!opt.static_background) {
    // D_tau x = F((D_tau + beta) D eps) - beta K0' x with the rescaled time derivative of eps zero
    double b = sc.beta(tau0);
    std::vector<double> ue(bg->size());
    for (size_t i = 0; i < ue.size(); ++i) ue[i] = eval_U(bg->R(i)) * eps0.values[i];
    x1 = (-b) * forward_transform(RadialFunction(bg, ue, 2), basis);
    if (K0) x1 += (-b) * K0->apply_full(x0);
  }

  OracleCompareReport rep;
  const auto& fq = *basis.freq;
  double best = -1;
  for (size_t j = 0; j < fq.size(); ++j) {
    double e = x0.values[j] * x0.values[j] * basis.rho[j] * fq.xi[j];
    if (e > best) best = e, rep.dominant_xi = fq.xi[j];
  }
  rep.quarter_period = 0.5 * M_PI / std::sqrt(rep.dominant_xi);
  // toward blow-up on the moving background, forward on the static one
  double t_end = opt.static_background ? t0 + rep.quarter_period : t0 - rep.quarter_period;

  FdOptions fo;
  fo.cfl = 0.5;
  size_t steps = size_t(std::ceil(rep.quarter_period / (fo.cfl * staggered_dr(*fg)) - 1e-12));
  fo.snapshot_every = std::max(1, int(steps / size_t(std::max(1, opt.checks))));
  FdTrajectory tr = fd_linearized_evolve(s, lambda_t, t_end, fo);
  if (tr.status == "nan") throw std::runtime_error("oracle_compare: fd run produced non-finite values");

  size_t last = 0;
  while (last + 1 < bg->size() && bg->R(last + 1) <= opt.compare_radius) ++last;
  std::vector<double> w = bg->weights_upto(last);
  for (size_t k = 1; k < tr.snapshots.size(); ++k) {
    const auto& st = tr.snapshots[k];
    double lam = lambda_t(st.t);
    RadialFunction d_fd = apply_D(resample(st.u, bg, lam, 1));
    SpectralState sp = free_evolve(x0, x1, tau0, tau_of(st.t), sc);
    RadialFunction d_sp = inverse_transform(sp.x, basis);
    double num = 0, den = 0;
    for (size_t i = 0; i <= last; ++i) {
      double e = d_sp.values[i] - d_fd.values[i];
      num += w[i] * e * e;
      den += w[i] * d_fd.values[i] * d_fd.values[i];
    }
    double err = std::sqrt(num / den);
    rep.times.push_back(st.t);
    rep.errors.push_back(err);
    rep.max_error = std::max(rep.max_error, err);
  }
  return rep;
}

}  // namespace wm
