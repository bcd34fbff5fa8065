#pragma once

namespace delayoc {

/// Cubic Hermite interpolant on one step of width dt at fraction theta,
/// from end values y0, y1 and end slopes m0, m1. Exact at theta = 0 and 1.
template <class T>
T hermite(const T& y0, const T& m0, const T& y1, const T& m1, double dt, double theta) {
  if (theta == 0.0) return y0;
  if (theta == 1.0) return y1;
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return y0 * h00 + m0 * (h10 * dt) + y1 * h01 + m1 * (h11 * dt);
}

}  // namespace delayoc
