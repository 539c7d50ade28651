// Finite-difference oracle and modulation diagnostics.

#include <cmath>

#include <doctest.h>

#include "wmlab/oracle.hpp"
#include "wmlab/profile.hpp"

using namespace wm;

TEST_CASE("staggered grid") {
  auto g = staggered_grid(10, 100);
  CHECK(g->size() == 100);
  CHECK(staggered_dr(*g) == doctest::Approx(0.1));
  CHECK(g->R(0) == doctest::Approx(0.05));
}

TEST_CASE("staggered interpolation is accurate for smooth odd data") {
  auto g = staggered_grid(10, 1000);
  auto f = RadialFunction::sample(g, [](double r) { return std::sin(r); }, 1);
  for (double r : {0.0, 0.013, 1.234, 7.7}) CHECK(staggered_value(f, r) == doctest::Approx(std::sin(r)).epsilon(1e-6));
}

TEST_CASE("harmonic map is a static solution") {
  auto g = staggered_grid(20, 2000);
  PhysicalState q;
  q.u = RadialFunction::sample(g, eval_Q, 1);
  q.ut = RadialFunction::sample(g, [](double) { return 0.0; }, 1);
  FdOptions fo;
  fo.background = [](double, double r) { return eval_Q(r); };
  auto tr = fd_evolve(q, 1.0, fo);
  CHECK(tr.status == "ok");
  double e = 0;
  for (size_t i = 0; i < g->size() && g->R(i) <= 10; ++i) e = std::max(e, std::abs(tr.snapshots.back().u.values[i] - eval_Q(g->R(i))));
  CHECK(e < 1e-4);
}

TEST_CASE("small pulse conserves energy before reaching the boundary") {
  auto g = staggered_grid(30, 3000);
  PhysicalState s;
  s.u = RadialFunction::sample(g, [](double r) { return 0.01 * r * std::exp(-std::pow(r - 5, 2)); }, 1);
  s.ut = RadialFunction::sample(g, [](double) { return 0.0; }, 1);
  auto tr = fd_evolve(s, 5.0);
  double e0 = fd_energy(tr.snapshots.front()), e1 = fd_energy(tr.snapshots.back());
  CHECK(e1 == doctest::Approx(e0).epsilon(1e-3));
}

TEST_CASE("scale extraction recovers the profile scale") {
  auto g = staggered_grid(2, 4000);
  for (double lam : {5.0, 20.0}) {
    auto u = RadialFunction::sample(g, [&](double r) { return eval_Q(lam * r); }, 1);
    auto fit = extract_scale(u);
    CHECK(fit.profile_shaped);
    CHECK(fit.lambda == doctest::Approx(lam).epsilon(1e-4));
  }
}
