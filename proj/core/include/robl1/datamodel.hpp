#pragma once

#include "robl1/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace robl1 {

/// Ground truth behind a generated scalar-output dataset: y = X^T theta0 + gross + noise.
struct Truth {
  Vector theta0;
  Vector gross;
  Vector noise;
};

/// Regressors X (n x N, column t is x_t) and outputs y (length N).
struct Dataset {
  Matrix regressors;
  Vector outputs;
  std::optional<Truth> truth;
  std::vector<std::string> labels;

  Index dim() const { return regressors.rows(); }
  Index samples() const { return regressors.cols(); }

  /// Throws InvalidArgument when the shape invariants or the truth identity fail.
  void validate() const;
};

struct MultiTruth {
  Matrix a0;     // m x n
  Matrix gross;  // m x N
  Matrix noise;  // m x N
};

/// Multi-output analogue: Y (m x N) with columns y_t = A x_t + f_t + e_t.
struct MultiDataset {
  Matrix regressors;
  Matrix outputs;
  std::optional<MultiTruth> truth;

  Index dim() const { return regressors.rows(); }
  Index samples() const { return regressors.cols(); }
  Index outputs_dim() const { return outputs.rows(); }

  void validate() const;
};

/// Sign partition of the samples induced by a candidate parameter.
///
/// plus:  x_t^T theta - y_t > threshold
/// minus: x_t^T theta - y_t < -threshold
/// zero:  |x_t^T theta - y_t| <= tol * (1 + |y_t|)
struct IndexPartition {
  IndexSet plus;
  IndexSet minus;
  IndexSet zero;
  double tol = 0.0;
};

inline constexpr double kDefaultPartitionTol = 1e-7;

IndexPartition partition_indices(const Dataset& data, const Vector& theta,
                                 double tol = kDefaultPartitionTol);

/// Residuals phi(theta) = y - X^T theta.
Vector residuals(const Dataset& data, const Vector& theta);

enum class RegressorKind { gaussian, affine_gaussian, arx, state_estimation };
enum class SignMode { two_sided, positive_only };

/// ARX system  y_t = sum_j a_j y_{t-j} + sum_{k=0..n_b} b_k^T u_{t-k} + f_t + e_t.
struct ArxParams {
  int n_a = 0;
  int n_b = 0;
  int n_u = 1;
  Vector a;  // length n_a
  Vector b;  // length (n_b + 1) * n_u, ordered u_t, u_{t-1}, ..., u_{t-n_b}

  Index regressor_dim() const { return n_a + (n_b + 1) * n_u; }
  /// theta0 in regressor order: [a; b].
  Vector parameter_vector() const;
};

/// z_{t+1} = A z_t + B u_t,  y~_t = C^T z_t + f_t.
struct LtiParams {
  Matrix a;  // k x k
  Matrix b;  // k x q
  Vector c;  // k
};

struct GenSpec {
  Index n = 4;
  Index samples = 200;
  RegressorKind regressor_kind = RegressorKind::gaussian;
  double outlier_fraction = 0.0;
  double outlier_mean = 100.0;
  double outlier_std = 31.622776601683793;  // sqrt(1000)
  SignMode sign_mode = SignMode::two_sided;
  std::optional<double> noise_snr_db;
  std::uint64_t seed = 0;
  std::optional<ArxParams> arx_params;
  std::optional<LtiParams> lti_params;

  /// round-half-away-from-zero of fraction * N.
  Index outlier_count() const;
  void validate() const;
};

/// Deterministic in spec.seed; populates Dataset::truth.
Dataset generate(const GenSpec& spec);

/// Columns x_t = [y_{t-1..t-n_a}, u_t, u_{t-1}, ..., u_{t-n_b}] for t = max(n_a, n_b) .. T-1.
/// `inputs` is n_u x T; `outputs` has length T.
Matrix build_regressor_matrix(const Vector& outputs, const Matrix& inputs, int n_a, int n_b);

/// Equation-error image of a sensor fault series: f_t = w_t - sum_{j=1..n_a} theta0_j w_{t-j}.
Vector sensor_fault_to_equation_error(const Vector& fault, const Vector& theta0, int n_a);

/// Initial-state estimation as a regression: x_t = (A^t)^T C, y_t = y~_t - C^T Delta_t u-bar_t.
/// `inputs` is q x N (column t is u_t), `observed` has length N; t runs from 0.
Dataset build_state_estimation_problem(const Matrix& a, const Matrix& b, const Vector& c,
                                       const Matrix& inputs, const Vector& observed);

/// Samples a stable ARX(n_a, n_b) system with scalar input by rejection on the spectral
/// radius of the companion matrix.
ArxParams sample_stable_arx(int n_a, int n_b, std::uint64_t seed, double max_radius = 0.95);

/// Multi-output generation: Gaussian X (n x N), Gaussian A0 (m x n); a fraction of
/// columns receives a full gross error vector f_t with iid Normal(mean, std^2) entries.
MultiDataset generate_multi(Index m, const GenSpec& spec);

}  // namespace robl1
