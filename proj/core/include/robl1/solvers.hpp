#pragma once

#include "robl1/datamodel.hpp"

#include <vector>

namespace robl1 {

enum class L1Method { exact_lp, first_order };

struct SolverOptions {
  double opt_tol = 1e-9;
  int max_iter = 100000;
  L1Method method = L1Method::exact_lp;

  void validate() const;
};

enum class SolveStatus { optimal, iteration_limit, infeasible_input };

struct Estimate {
  Vector theta;
  Vector residuals;  // y - X^T theta
  double objective = 0.0;
  SolveStatus status = SolveStatus::optimal;
  int iterations = 0;
};

struct ReweightedResult {
  Estimate estimate;
  /// theta^(0), ..., theta^(r_max).
  std::vector<Vector> iterates;
  /// w^(0), ..., w^(r_max); each positive and summing to one.
  std::vector<Vector> weights;
};

struct RegularizedSolution {
  Vector theta;
  Vector phi;
  double lambda = 0.0;
  /// S^c: indices where phi is nonzero.
  IndexSet support;
  /// Subgradient of ||phi||_1 at phi; sign(phi_t) on the support.
  Vector signs;
  double objective = 0.0;
  SolveStatus status = SolveStatus::optimal;
  int iterations = 0;
};

struct MatrixEstimate {
  Matrix a;          // m x n
  Matrix residuals;  // Y - A X
  double objective = 0.0;
  SolveStatus status = SolveStatus::optimal;
  int iterations = 0;
};

/// min_theta sum_t |y_t - x_t^T theta|. Throws NumericalError when rank(X) < n.
Estimate solve_l1(const Dataset& data, const SolverOptions& opts = {});

/// min_theta sum_t w_t |y_t - x_t^T theta|.
Estimate solve_weighted_l1(const Dataset& data, const Vector& weights,
                           const SolverOptions& opts = {});

/// Default xi regularizer: 1e-4 * (1 + median |y|).
double default_reweight_delta(const Dataset& data);

/// Iteratively reweighted l1 starting from uniform weights 1/N.
ReweightedResult solve_reweighted_l1(const Dataset& data, int r_max, double delta,
                                     const SolverOptions& opts = {});

/// min 1/2 ||y - X^T theta - phi||^2 + lambda ||phi||_1.
RegularizedSolution solve_regularized(const Dataset& data, double lambda,
                                      const SolverOptions& opts = {});

/// Closed form for a prescribed support S^c and signs of phi on it. Uses Psi s = s,
/// which holds for any optimal subgradient since X s = 0. `signs` has one entry per
/// support index. Does not check optimality.
RegularizedSolution regularized_closed_form(const Dataset& data, double lambda,
                                            const IndexSet& support, const Vector& signs);

/// Objective 1/2 ||y - X^T theta - phi||^2 + lambda ||phi||_1.
double regularized_objective(const Dataset& data, double lambda, const Vector& theta,
                             const Vector& phi);

/// Ordinary least squares on the listed samples.
Estimate least_squares_oracle(const Dataset& data, const IndexSet& inliers);

/// min_A sum_t ||y_t - A x_t||_2.
MatrixEstimate solve_sum_of_norms(const MultiDataset& data, const SolverOptions& opts = {});

/// min_a sum_t ||y_t - a||_2 over the columns of `points` (m x N).
Vector geometric_median(const Matrix& points, const SolverOptions& opts = {});

double l1_objective(const Dataset& data, const Vector& theta);
double sum_of_norms_objective(const MultiDataset& data, const Matrix& a);

}  // namespace robl1
