#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace spinorlab {

// Number of worker threads, capped by SPINORLAB_THREADS if set.
int thread_count();

// Chunked parallel loop over [0, n). Work is split into a fixed number of
// chunks so that results assembled per chunk are independent of the thread
// count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Deterministic chunked reduction: sums body(i) over [0, n) with a fixed
// chunk decomposition, so the floating-point result does not depend on the
// thread count.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& body);

// C-infinity cutoff that is exactly 0 for xi <= 0 and exactly 1 for xi >= 1.
inline double smooth_step(double xi) {
  if (xi <= 0.0) return 0.0;
  if (xi >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / xi);
  const double b = std::exp(-1.0 / (1.0 - xi));
  return a / (a + b);
}

// Compactly supported bump (1 - r^2)^8: zero for |r| >= 1, C^7 at the edge,
// with mild high derivatives (an exp-style bump has far harsher derivative
// peaks near the edge, which hurts 4th-order error constants).
inline double smooth_bump(double r) {
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double s = 1.0 - r2;
  const double s2 = s * s;
  const double s4 = s2 * s2;
  return s4 * s4;
}

// 2d bump centered at (t0,x0) with half-widths (wt,wx); periodic in x with
// period L when L > 0.
double bump2d(double t, double x, double t0, double x0, double wt, double wx, double L);

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace spinorlab
