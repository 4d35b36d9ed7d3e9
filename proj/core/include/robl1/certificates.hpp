#pragma once

#include "robl1/datamodel.hpp"
#include "robl1/solvers.hpp"

#include <optional>

namespace robl1 {

/// Margin for "<= 1" and "strictly > 1" decisions.
inline constexpr double kCertificateTol = 1e-8;

enum class Uniqueness { unique, non_unique, indeterminate };

struct RankEvidence {
  Index rank_i0 = 0;
  /// min { sum_{I0} |x_t^T eta| : z^T eta = 1 }; absent when z = 0.
  std::optional<double> s2prime_lp_value;
};

struct Certificate {
  double s3_value = 0.0;
  /// alpha over I0 (ordered as partition.zero) with X_{I0} alpha = z.
  Vector lambda_coeffs;
  bool optimal = false;
  std::optional<bool> unique;
  Uniqueness uniqueness = Uniqueness::indeterminate;
  RankEvidence rank_evidence;
  IndexPartition partition;
  /// {t in I0 : |lambda_t| < 1 - tol}, diagnostic only.
  IndexSet s1prime_set;
  double tol = kCertificateTol;
};

struct S3Result {
  double value = 0.0;  // +inf when z is outside range(X_{I0})
  Vector lambda;       // indexed like partition.zero; empty when infeasible
  IndexPartition partition;
  Vector z;
  /// Minimizer of the S2' LP (z^T eta = 1); empty unless z != 0 and the value is finite.
  Vector eta;
};

/// min ||alpha||_inf s.t. X_{I0} alpha = z, z = sum_{I+} x_t - sum_{I-} x_t.
S3Result s3_value(const Dataset& data, const Vector& theta,
                  double partition_tol = kDefaultPartitionTol);

/// Optimality verdict s3 <= 1 + tol. Uniqueness fields are filled only when optimal.
Certificate check_optimal(const Dataset& data, const Vector& theta, double tol = kCertificateTol,
                          double partition_tol = kDefaultPartitionTol);

struct UniquenessResult {
  Uniqueness verdict = Uniqueness::indeterminate;
  RankEvidence evidence;
  IndexSet s1prime_set;
};

/// Requires an optimal theta (throws InvalidArgument otherwise).
UniquenessResult check_unique(const Dataset& data, const Vector& theta,
                              double tol = kCertificateTol,
                              double partition_tol = kDefaultPartitionTol);

/// ||I+| - |I-|| <= |I0| for data whose last regressor row is all ones.
bool affine_necessary(const Dataset& data, const Vector& theta,
                      double partition_tol = kDefaultPartitionTol);

struct T3Result {
  double value = 0.0;  // +inf when infeasible
  Matrix beta;         // m x |I0|
  IndexSet zero;       // I0: columns with zero residual
  double gap = 0.0;    // duality-gap bound on value
};

/// min max_{t in I0} ||beta_t||_2 s.t. sum_{I0} beta_t x_t^T = -sum_{I^c} v_t x_t^T,
/// v_t = (A x_t - y_t)/||A x_t - y_t||.
T3Result t3_solve(const MultiDataset& data, const Matrix& a,
                  double partition_tol = kDefaultPartitionTol, double inner_tol = 1e-9);
double t3_value(const MultiDataset& data, const Matrix& a,
                double partition_tol = kDefaultPartitionTol);

/// Both stationarity equations with a valid subgradient, each to tol (1 + ||y||_inf), and
/// X s ~ 0.
bool check_regularized_kkt(const Dataset& data, double lambda, const RegularizedSolution& sol,
                           double tol = 1e-7);

/// rank(X) = n and rank(Psi_{S^c}) = |S^c|.
bool check_regularized_unique(const Dataset& data, const RegularizedSolution& sol);

const char* to_string(Uniqueness u);

}  // namespace robl1
