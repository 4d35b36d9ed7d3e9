#pragma once

#include "robl1/linalg.hpp"

namespace robl1 {

/// Result of the exact weighted least-absolute-deviations engine.
struct LadResult {
  Vector theta;
  /// u in [-1, 1]^N with sum_t w_t u_t x_t = 0 and u_t = sign(r_t) wherever r_t != 0.
  Vector dual;
  /// The n samples interpolated by the final vertex.
  IndexSet basis;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes sum_t w_t |y_t - x_t^T theta| over theta by a bounded dual simplex that
/// walks between interpolating vertices.
///
/// Each iteration releases the basic sample whose multiplier violates |u_i| <= 1 the most,
/// moves along the edge that keeps the other basic samples interpolated, and stops at the
/// breakpoint where the directional slope turns nonnegative (long-step ratio test). After
/// a stretch of non-improving pivots the pivot rules switch to smallest-index choices.
///
/// Requires x (n x N) of full row rank; weights nonnegative.
LadResult minimize_weighted_l1(const Matrix& x, const Vector& y, const Vector& weights,
                               int max_iter = 100000);

}  // namespace robl1
