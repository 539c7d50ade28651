// Coupled iteration pieces and the golden regression.

#include <cmath>
#include <cstdlib>

#include <doctest.h>

#include "fixtures.hpp"
#include "wmlab/acceptance.hpp"
#include "wmlab/cache.hpp"
#include "wmlab/evolution.hpp"

using namespace wm;

TEST_CASE("cutoffs") {
  CHECK(light_cone_cutoff(10, 100, 0.25) == 1.0);
  CHECK(light_cone_cutoff(60, 100, 0.25) == 0.0);
  CHECK(inner_cutoff(5, 100, 0.25) == 1.0);
  CHECK(inner_cutoff(13, 100, 0.25) == 0.0);
  double prev = 1;
  for (double R = 25; R <= 50; R += 1) {
    double v = light_cone_cutoff(R, 100, 0.25);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("nonlinearity starts at quadratic order in eps") {
  const auto& b = test::small_basis();
  ProfileModel p;
  double a = 1e-3;
  auto eps = RadialFunction::sample(b.grid, [&](double R) { return a * R * std::exp(-R * R); }, 1);
  auto n1 = assemble_N(eps, 100, p);
  auto eps2 = RadialFunction::sample(b.grid, [&](double R) { return 2 * a * R * std::exp(-R * R); }, 1);
  auto n2 = assemble_N(eps2, 100, p);
  double ratio = n2.norm() / n1.norm();
  CHECK(ratio > 3.9);
  CHECK(ratio < 8.1);
  auto zero = RadialFunction::sample(b.grid, [](double) { return 0.0; }, 1);
  CHECK(assemble_N(zero, 100, p).norm() == 0.0);
}

TEST_CASE("h extraction: both paths agree on band-limited data") {
  const auto& b = test::small_basis();
  auto x = log_gaussian(b.freq, 1.0, 0.7);
  double h1 = extract_h(x, b), h2 = extract_h_direct(x, b);
  CHECK(h1 != 0.0);
  CHECK(std::abs(h1 - h2) <= 0.03 * std::abs(h1));
  CHECK(extract_h(SpectralCoefficients::zeros(b.freq), b) == 0.0);
}

TEST_CASE("reconstruction of the resonant part") {
  const auto& b = test::small_basis();
  SpectralState st;
  st.x = SpectralCoefficients::zeros(b.freq);
  st.dtau_x = st.x;
  ResonantState res;
  res.c = 0.5;
  auto eps = reconstruct_epsilon(st, res, b);
  for (size_t i = 0; i < eps.size(); i += 500) CHECK(eps.values[i] == doctest::Approx(0.5 * eval_phi0(b.grid->R(i))));
}

TEST_CASE("zero data gives the zero iteration") {
  const auto& b = test::small_basis();
  EvolutionContext ctx;
  ctx.basis = &b;
  ctx.K0 = &test::small_K0();
  IterationData d;
  d.x0 = SpectralCoefficients::zeros(b.freq);
  d.x1 = d.x0;
  EvolutionConfig cfg;
  cfg.tau_end = 120;
  cfg.max_iter = 2;
  auto taus = geometric_taus(100, 120, 1.02);
  auto z = zeroth_iterate(d, taus, ctx.scaling);
  auto step = iterate_step(z, d, ctx, cfg);
  CHECK(step.increment == 0.0);
  CHECK(increment_norm(z, z, ctx.scaling, 0.1) == 0.0);
}

TEST_CASE("golden regression: first three increments of the coupled iteration") {
  RunConfig cfg;
  cfg.set("evolve.max_iter", nlohmann::json(3));
  AcceptanceSuite suite(cfg);
  const auto& res = suite.golden_run();
  const auto& gold = golden_numbers();
  CHECK(res.data_norm == doctest::Approx(gold.data_norm).epsilon(1e-9));
  REQUIRE(res.increments.size() == 3);
  for (size_t j = 0; j < 3; ++j) CHECK(res.increments[j] == doctest::Approx(gold.increments[j]).epsilon(1e-6));
}
