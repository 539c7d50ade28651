// Eigenbasis, measure and transforms.

#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"

using namespace wm;

TEST_CASE("eigen-residual converges at fourth order") {
  double res[2];
  for (int k = 0; k < 2; ++k) {
    auto c = test::small_basis_config();
    c.grid.n_core = 4096 << k;
    res[k] = eigen_residuals(build_basis(c)).max_residual;
  }
  CHECK(res[1] < 1e-3);
  CHECK(res[0] / res[1] > 12);
}

TEST_CASE("eigenfunctions start like R^2") {
  const auto& b = test::small_basis();
  for (size_t j = 0; j < b.n_xi(); j += 16) CHECK(b.phi(0, j) / (b.grid->R(0) * b.grid->R(0)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("calibrated measure stays close to the amplitude formula") {
  const auto& b = test::small_basis();
  CHECK(!b.calibration_flag);
  CHECK(std::abs(b.calibration - 1) < 0.05);
  // rho ~ xi^2 at high frequency with the R^2 normalisation
  size_t n = b.n_xi();
  double slope = std::log(b.rho[n - 1] / b.rho[n - 24]) / std::log(b.freq->xi[n - 1] / b.freq->xi[n - 24]);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Parseval on a held-out function") {
  const auto& b = test::small_basis();
  CHECK(parseval_defect(heldout_gaussian(b.grid), b) < 0.05);
}

TEST_CASE("inverse transform recovers a band-limited function") {
  const auto& b = test::small_basis();
  auto f = RadialFunction::sample(b.grid, [](double R) { return R * R * std::exp(-R * R / 8); }, 2);
  auto back = inverse_transform(forward_transform(f, b), b);
  double num = 0, den = 0;
  for (size_t i = 0; i < f.size() && b.grid->R(i) < 10; ++i) {
    double R = b.grid->R(i);
    num += std::pow(back.values[i] - f.values[i], 2) * R;
    den += f.values[i] * f.values[i] * R;
  }
  CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("log interpolation is accurate on power laws and extrapolates them exactly") {
  auto g = FrequencyGrid::log_spaced(1e-2, 1e2, 64);
  std::vector<double> v;
  for (double x : g->xi) v.push_back(std::pow(x, -1.5));
  SpectralCoefficients c(g, v);
  LogInterp I(c);
  CHECK(I(0.37) == doctest::Approx(std::pow(0.37, -1.5)).epsilon(1e-4));
  CHECK(I(500.0) == doctest::Approx(std::pow(500.0, -1.5)).epsilon(1e-6));
  CHECK(fit_upper_exponent(c) == doctest::Approx(-1.5));
  CHECK(fit_lower_exponent(c) == doctest::Approx(-1.5));
}

TEST_CASE("weighted norms") {
  auto g = FrequencyGrid::log_spaced(1e-3, 1e3, 200);
  auto z = SpectralCoefficients::zeros(g);
  CHECK(s0_norm(z, 0.1) == 0.0);
  std::vector<double> v(g->size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-std::pow(std::log(g->xi[i]), 2));
  SpectralCoefficients x(g, v);
  CHECK(s0_norm(2.0 * x, 0.1) == doctest::Approx(2 * s0_norm(x, 0.1)));
  CHECK(s0_weight(10.0, 0.1) > s0_weight(1.0, 0.1));
}
