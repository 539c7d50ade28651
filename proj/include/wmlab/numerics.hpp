#pragma once

#include <cmath>

namespace wm {

// int_0^1 (P0 + (P1 - P0) s) cos(p0 + (p1 - p0) s) ds given sin/cos of p0, p1.
inline double filon_cos(double P0, double P1, double p0, double p1, double s0, double c0, double s1, double c1) {
  double d = p1 - p0;
  double i0, i1;
  if (std::abs(d) < 1e-2) {
    double d2 = d * d;
    i0 = c0 * (1 - d2 / 6) - s0 * (d / 2 - d2 * d / 24);
    i1 = c0 * (0.5 - d2 / 8) - s0 * (d / 3 - d2 * d / 30);
  } else {
    i0 = (s1 - s0) / d;
    i1 = s1 / d + (c1 - c0) / (d * d);
  }
  return P0 * i0 + (P1 - P0) * i1;
}

// same with sin in place of cos (sin x = cos(x - pi/2))
inline double filon_sin(double P0, double P1, double p0, double p1, double s0, double c0, double s1, double c1) {
  return filon_cos(P0, P1, p0, p1, -c0, s0, -c1, s1);
}

// four-point Lagrange weights at position s measured from the first node
inline void lagrange4(double s, double l[4]) {
  l[0] = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  l[1] = s * (s - 2) * (s - 3) / 2.0;
  l[2] = -s * (s - 1) * (s - 3) / 2.0;
  l[3] = s * (s - 1) * (s - 2) / 6.0;
}

// quintic smoothstep: 0 for t <= 0, 1 for t >= 1
inline double smoothstep5(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (10 - 15 * t + 6 * t * t);
}

}  // namespace wm
