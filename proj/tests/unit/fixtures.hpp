#pragma once

// Small tables shared by the unit tests (built once per process).

#include "wmlab/spectral.hpp"
#include "wmlab/transference.hpp"

namespace wm::test {

inline BasisConfig small_basis_config() {
  BasisConfig c;
  c.grid.r_max = 200;
  c.grid.n_core = 4096;
  c.grid.tail_ratio = 1.02;
  c.xi_min = 1e-3;
  c.xi_max = 1e3;
  c.n_xi = 160;
  return c;
}

inline const EigenbasisTable& small_basis() {
  static const EigenbasisTable b = [] {
    EigenbasisTable t = build_basis(small_basis_config());
    build_measure(t, default_calibration_set(t.grid));
    return t;
  }();
  return b;
}

inline const KernelTable& small_kernel() {
  static const KernelTable k = build_kernel_F(small_basis());
  return k;
}

inline const K0Operator& small_K0() {
  static const K0Operator k(small_kernel());
  return k;
}

}  // namespace wm::test
