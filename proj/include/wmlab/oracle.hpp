#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmlab/grid.hpp"
#include "wmlab/spectral.hpp"
#include "wmlab/transference.hpp"

namespace wm {

//===----------------------------------------------------------------------===//
// Finite-difference solver of the co-rotational equation
//   -u_tt + u_rr + u_r / r = sin(2u) / (2 r^2)
// on the staggered grid r_i = (i + 1/2) dr. The odd reflection u(-r) = -u(r)
// fixes the ghost value, so the flux form needs no origin special case.
//===----------------------------------------------------------------------===//

struct PhysicalState {
  double t = 0;
  RadialFunction u, ut;
};

// staggered uniform grid with n nodes covering (0, r_max)
GridPtr staggered_grid(double r_max, size_t n);
double staggered_dr(const RadialGrid& g);

struct FdOptions {
  double cfl = 0.5;                  // |dt| / dr, at most 1/2
  int snapshot_every = 0;            // 0: first and last slice only
  // background that the outgoing condition is imposed on: u - background(t, r)
  std::function<double(double, double)> background;
  // evaluated at every snapshot; returning true ends the run early
  std::function<bool(const PhysicalState&)> stop;
};

struct FdTrajectory {
  std::vector<PhysicalState> snapshots;
  std::string status = "ok";  // "ok", "stopped", or "nan"
  size_t steps = 0;
  double dt = 0;
};

// Evolves to t_end (either direction). u must vanish linearly at the origin.
// A NaN aborts the run; the last healthy slice is kept and status is "nan".
FdTrajectory fd_evolve(const PhysicalState& state, double t_end, const FdOptions& opt = {});

// eps_tt = eps_rr + eps_r / r - cos(2 Q(lambda(t) r)) / r^2 eps
FdTrajectory fd_linearized_evolve(const PhysicalState& state, const std::function<double(double)>& lambda,
                                  double t_end, const FdOptions& opt = {});

// Discrete energy of the staggered scheme on r <= radius (all nodes if radius <= 0).
double fd_energy(const PhysicalState& s, double radius = 0);

// Cubic B-spline value of a staggered-grid function at r (odd extension at 0,
// `outside` beyond the last node).
double staggered_value(const RadialFunction& f, double r, double outside = 0.0);
// f(R / scale) on the nodes of g
RadialFunction resample(const RadialFunction& f, GridPtr g, double scale = 1.0, int origin_order = 1);

//===----------------------------------------------------------------------===//
// Modulation diagnostics
//===----------------------------------------------------------------------===//

struct ScaleFit {
  double lambda = 0;
  double residual = 0;  // relative L2 misfit on the fit window
  bool profile_shaped = false;
  std::string message;
};

// Least-squares fit u(r) ~ Q(lambda r) on r <= 1/(2 lambda), three rounds.
ScaleFit extract_scale(const RadialFunction& u);

struct ProbeOptions {
  double nu = 0.25;
  double t0 = 0.1;
  double delta0 = 1e-3;
  double r_max = 0.6;
  size_t n_r = 3000;
  double cfl = 0.5;
  int samples = 40;          // snapshots over [t0, t0/2]
  double resolution_stop = 0.1;  // stop when lambda_hat * dr exceeds this
};

struct ProbeReport {
  std::vector<double> t, lambda_hat, tracking;  // tracking = lambda_hat t^{1+nu} / its initial value
  std::vector<double> fit_residual, light_cone_energy;
  double max_tracking_deviation = 0;
  bool energy_monotone = false;
  std::string status;
  nlohmann::json to_json() const;
};

// Data Q(lambda(t0) r) + eps0 with the scaling velocity plus eps1; eps0, eps1
// are smooth bumps of height delta0 inside the light cone. Evolves toward t0/2.
ProbeReport stability_probe(const ProbeOptions& opt);

//===----------------------------------------------------------------------===//
// Cross-validation against the spectral propagator
//===----------------------------------------------------------------------===//

struct OracleCompareOptions {
  bool static_background = true;
  double nu = 0.25;
  double t0 = 40.0;           // slow background: lambda(t) = (t / t0)^{-1-nu}
  double bump_center = 3.0;
  double bump_width = 2.0;    // half width of the compact data
  double r_max = 40.0;        // fd domain
  size_t n_r = 4000;
  double compare_radius = 15.0;
  int checks = 6;             // comparison times over the quarter period
};

struct OracleCompareReport {
  std::vector<double> times, errors;  // physical times and relative L2 errors of D eps
  double quarter_period = 0;
  double dominant_xi = 0;
  double max_error = 0;
  nlohmann::json to_json() const;
};

// Evolves eps with the linearised fd solver, applies D in the rescaled
// variable and compares with the spectral free propagator of matched data.
// K0 (optional) supplies the beta K0 x correction of the data on a moving background.
OracleCompareReport oracle_compare(const EigenbasisTable& basis, const K0Operator* K0,
                                   const OracleCompareOptions& opt);

}  // namespace wm
