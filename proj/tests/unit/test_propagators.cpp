// Free wave, Duhamel, resonance parametrix and Phi.

#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "wmlab/propagators.hpp"

using namespace wm;

namespace {

SpectralCoefficients bump(FreqPtr g) {
  std::vector<double> v;
  for (double x : g->xi) v.push_back(std::exp(-std::pow(std::log(x), 2)));
  return SpectralCoefficients(g, v);
}

}  // namespace

TEST_CASE("free wave on a static background is a cosine") {
  auto g = FrequencyGrid::log_spaced(1e-2, 1e2, 64);
  auto x0 = bump(g);
  auto x1 = SpectralCoefficients::zeros(g);
  auto s = Scaling::frozen(1.0);
  auto st = free_evolve(x0, x1, 10.0, 13.0, s);
  for (size_t i = 0; i < g->size(); i += 5)
    CHECK(st.x.values[i] == doctest::Approx(x0.values[i] * std::cos(std::sqrt(g->xi[i]) * 3.0)).epsilon(1e-10));
}

TEST_CASE("free wave reproduces its data at tau0") {
  auto g = FrequencyGrid::log_spaced(1e-2, 1e2, 64);
  auto x0 = bump(g), x1 = 0.3 * bump(g);
  auto st = free_evolve(x0, x1, 100.0, 100.0, Scaling::power(0.25));
  for (size_t i = 0; i < g->size(); ++i) {
    CHECK(st.x.values[i] == doctest::Approx(x0.values[i]));
    CHECK(st.dtau_x.values[i] == doctest::Approx(x1.values[i]));
  }
}

TEST_CASE("Duhamel of a zero source vanishes and matches the static closed form") {
  auto g = FrequencyGrid::log_spaced(1e-1, 1e1, 32);
  auto s = Scaling::frozen(1.0);
  auto nodes = geometric_taus(1.0, 4.0, 1.01);
  auto zero = duhamel([](double, double) { return 0.0; }, nodes, 4.0, g, s);
  for (double v : zero.x.values) CHECK(v == 0.0);
  // constant source f = 1: x = -(1 - cos(sqrt(xi)(tau - tau0))) / xi
  auto one = duhamel([](double, double) { return 1.0; }, nodes, 4.0, g, s);
  for (size_t i = 0; i < g->size(); i += 4) {
    double w = std::sqrt(g->xi[i]);
    CHECK(one.x.values[i] == doctest::Approx(-(1 - std::cos(3 * w)) / g->xi[i]).epsilon(1e-4));
  }
}

TEST_CASE("resonance parametrix solves its equation") {
  const double nu = 0.25;
  auto [a, b] = c_fundamental_exponents(nu);
  CHECK(a == doctest::Approx(-5.0));
  CHECK(b == doctest::Approx(-9.0));
  auto r = [](double t) { return 1.0 / (t * t); };
  const double tau0 = 100, tau = 180, h = 1e-2;
  auto y = [&](double t) { return c_parametrix(r, tau0, t, nu).y; };
  double beta = (1 + 1 / nu) / tau, dbeta = -(1 + 1 / nu) / (tau * tau);
  double d1 = (y(tau + h) - y(tau - h)) / (2 * h);
  double d2 = (y(tau + h) - 2 * y(tau) + y(tau - h)) / (h * h);
  double lhs = d2 + 3 * beta * d1 + (dbeta + 2 * beta * beta) * y(tau);
  CHECK(lhs == doctest::Approx(r(tau)).epsilon(1e-4));
  auto zero = c_parametrix([](double) { return 0.0; }, tau0, tau, nu);
  CHECK(zero.y == 0.0);
}

TEST_CASE("homogeneous resonance solutions are power laws") {
  auto s = Scaling::power(0.25);
  auto taus = geometric_taus(100, 800, 1.02);
  std::vector<double> zero(taus.size(), 0.0);
  auto c = c_evolve(1.0, -5.0 / 100.0, taus, zero, zero, s);
  // c0 = 1, c1 = -5/tau0 selects tau^{-5}
  double slope = std::log(c.back().c / c.front().c) / std::log(taus.back() / taus.front());
  CHECK(slope == doctest::Approx(-5.0).epsilon(0.01));
}

TEST_CASE("geometric tau nodes") {
  auto t = geometric_taus(100, 800, 1.02);
  CHECK(t.front() == 100.0);
  CHECK(t.back() == doctest::Approx(800.0));
  for (size_t k = 1; k + 1 < t.size(); ++k) CHECK(t[k] / t[k - 1] == doctest::Approx(1.02));
}

TEST_CASE("Phi of zero is zero and Phi is linear") {
  const auto& K = test::small_K0();
  auto g = K.freq();
  auto taus = geometric_taus(1000, 1200, 1.02);
  std::vector<SpectralCoefficients> zero(taus.size(), SpectralCoefficients::zeros(g)), f;
  for (size_t k = 0; k < taus.size(); ++k) f.push_back(bump(g));
  auto s = Scaling::power(0.25);
  for (const auto& sl : apply_Phi(taus, zero, K, s))
    for (double v : sl.values) CHECK(v == 0.0);
  auto p1 = apply_Phi(taus, f, K, s);
  for (auto& sl : f) sl *= 3.0;
  auto p3 = apply_Phi(taus, f, K, s);
  for (size_t i = 0; i < g->size(); i += 9) CHECK(p3.back().values[i] == doctest::Approx(3 * p1.back().values[i]));
}
