// Grid, profile operators and the scaling map.

#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "wmlab/profile.hpp"

using namespace wm;

namespace {

GridPtr test_grid(int n_core = 4096) {
  GridSpec s;
  s.r_max = 40;
  s.n_core = n_core;
  s.tail_ratio = 1.0;
  return RadialGrid::make(s);
}

double rel_error(const RadialFunction& a, const RadialFunction& b, double r_hi) {
  double num = 0, den = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double R = a.grid->R(i);
    if (R > r_hi) break;
    num += std::pow(a.values[i] - b.values[i], 2) * R;
    den += b.values[i] * b.values[i] * R;
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("grid nodes increase and integrate R dR exactly enough") {
  auto g = test_grid();
  for (size_t i = 1; i < g->size(); ++i) REQUIRE(g->R(i) > g->R(i - 1));
  CHECK(g->R(0) == doctest::Approx(1e-4).epsilon(1e-6));
  // int_0^inf e^{-R^2} R dR = 1/2
  auto f = RadialFunction::sample(g, [](double R) { return std::exp(-R * R); }, 0);
  CHECK(g->integrate(f.values) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("first derivative is fourth order in the computational variable") {
  double err[2];
  for (int k = 0; k < 2; ++k) {
    auto g = test_grid(512 << k);
    auto f = RadialFunction::sample(g, [](double R) { return std::sin(R) * std::exp(-R / 4); }, 1);
    auto d = g->d1(f.values);
    double e = 0;
    for (size_t i = 4; i + 4 < g->size(); ++i) {
      double R = g->R(i);
      e = std::max(e, std::abs(d[i] - (std::cos(R) - std::sin(R) / 4) * std::exp(-R / 4)));
    }
    err[k] = e;
  }
  CHECK(std::log2(err[0] / err[1]) > 3.5);
}

TEST_CASE("phi0 spans the kernel of D") {
  auto g = test_grid();
  auto phi = RadialFunction::sample(g, eval_phi0, 1);
  auto d = apply_D(phi);
  CHECK(d.norm() / phi.norm() < 1e-6);
}

TEST_CASE("composed and potential forms of L and L~ agree") {
  auto g = test_grid();
  auto f = RadialFunction::sample(g, [](double R) { return R * R * std::exp(-R * R / 4); }, 2);
  CHECK(rel_error(apply_Ltilde(f), apply_Ltilde_potential(f), 20) < 1e-5);
  auto h = RadialFunction::sample(g, [](double R) { return R * R * R * std::exp(-R * R / 4); }, 3);
  CHECK(rel_error(apply_L(h), apply_L_potential(h), 20) < 1e-5);
}

TEST_CASE("right inverse of D") {
  auto g = test_grid();
  auto v = RadialFunction::sample(g, [](double R) { return R * R * std::exp(-R * R); }, 2);
  auto e = right_inverse_phi(v);
  CHECK(rel_error(apply_D(e), v, 20) < 1e-6);
}

TEST_CASE("profile identities") {
  for (double R : {0.01, 0.5, 1.0, 3.0, 50.0}) {
    CHECK(eval_Q(R) == doctest::Approx(2 * std::atan(R)));
    CHECK(eval_phi0(R) == doctest::Approx(R / (1 + R * R)));
    CHECK(eval_U(R) == doctest::Approx(-4 * R / std::pow(1 + R * R, 2)));
  }
  CHECK(potential_L(1.0) == doctest::Approx(-1.0));
  CHECK(potential_Ltilde(1.0) == doctest::Approx(2.0));
}

TEST_CASE("energy of the harmonic map") {
  GridSpec s;
  s.r_max = 2e4;
  s.n_core = 8192;
  s.tail_ratio = 1.01;
  auto g = RadialGrid::make(s);
  auto q = RadialFunction::sample(g, eval_Q, 1);
  auto z = RadialFunction::sample(g, [](double) { return 0.0; }, 1);
  // (1/2) int (Q_r^2 + sin^2 Q / r^2) r dr = 2, minus the tail beyond r_max
  CHECK(energy(q, z) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("parameter validation names the field and its bound") {
  BlowupParameters p;
  p.kappa = 0.7;
  try {
    p.validate();
    FAIL("kappa = 0.7 accepted");
  } catch (const std::invalid_argument& e) {
    std::string m = e.what();
    CHECK(m.find("kappa") != std::string::npos);
    CHECK(m.find("(0, 1/2)") != std::string::npos);
  }
  BlowupParameters ok;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("scaling map") {
  ScalingMap m(0.25);
  for (double tau : {10.0, 100.0, 1e3}) {
    CHECK(m.tau_of_t(m.t_of_tau(tau)) == doctest::Approx(tau));
    CHECK(m.beta(tau) == doctest::Approx(1.25 / (0.25 * tau)));
    CHECK(m.beta(tau) > 0);
    CHECK(m.lambda(tau) == doctest::Approx(m.lambda_t(m.t_of_tau(tau))));
  }
  // int lambda^{-1} dtau matches a direct quadrature
  double a = 100, b = 300, sum = 0;
  int n = 20000;
  for (int i = 0; i < n; ++i) sum += (b - a) / n / m.lambda(a + (i + 0.5) * (b - a) / n);
  CHECK(m.inv_lambda_integral(a, b) == doctest::Approx(sum).epsilon(1e-7));
  auto st = Scaling::frozen(2.0);
  CHECK(st.beta(5.0) == 0.0);
  CHECK(st.advance(1.0, 3.0) == doctest::Approx(7.0));
}
