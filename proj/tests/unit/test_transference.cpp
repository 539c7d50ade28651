// Transference kernel, K0 and its diagonal split.

#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"

using namespace wm;

TEST_CASE("xi d/dxi of a power law") {
  auto g = FrequencyGrid::log_spaced(1e-2, 1e2, 128);
  std::vector<double> v;
  for (double x : g->xi) v.push_back(x * x);
  auto d = xi_dxi(SpectralCoefficients(g, v));
  for (size_t i = 0; i < g->size(); i += 7) CHECK(d.values[i] == doctest::Approx(2 * v[i]).epsilon(1e-4));
}

TEST_CASE("smooth bump is compactly supported") {
  const auto& b = test::small_basis();
  auto f = smooth_bump(b.grid, 2.0, 1.0);
  for (size_t i = 0; i < f.size(); ++i) {
    double R = b.grid->R(i);
    if (R <= 1.0 || R >= 3.0) CHECK(f.values[i] == 0.0);
  }
  CHECK(f.norm() > 0);
}

TEST_CASE("kernel is finite and its off-diagonal decays") {
  const auto& F = test::small_kernel();
  CHECK(F.values.allFinite());
  size_t n = F.values.rows();
  // far from the diagonal the kernel is much smaller than near it
  double near = std::abs(F.values(n / 2, n / 2 + 1)), far = std::abs(F.values(n / 2, n - 1));
  CHECK(far < near);
}

TEST_CASE("K0 is linear and the diagonal split sums to the whole") {
  const auto& F = test::small_kernel();
  const auto& K = test::small_K0();
  auto z = SpectralCoefficients::zeros(F.freq);
  for (double v : K.apply(z).values) CHECK(v == 0.0);
  auto [d, nd] = split_diag(F, 4);
  CHECK((d.matrix() + nd.matrix() - K.matrix()).norm() <= 1e-10 * K.matrix().norm());
  for (double xi : {0.1, 1.0, 10.0}) {
    CHECK(KernelTable::diag_weight(xi, xi, 4) == 1.0);
    CHECK(KernelTable::diag_weight(xi, 3 * xi, 4) == 0.0);
  }
}

TEST_CASE("transference identity on compact bumps (coarse table)") {
  // the 5% bound at production resolution is acceptance criterion 5
  const auto& b = test::small_basis();
  for (auto [c, hw] : {std::pair{2.0, 1.0}, std::pair{3.0, 2.0}, std::pair{1.0, 0.5}})
    CHECK(transference_residual(smooth_bump(b.grid, c, hw), b, test::small_K0()) < 0.15);
}
