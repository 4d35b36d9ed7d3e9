#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace robl1 {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted list of zero-based sample indices.
using IndexSet = std::vector<Index>;

/// Singular-value ratio below which a matrix is declared rank deficient.
inline constexpr double kRankRatio = 1e-10;

/// Numerical rank: number of singular values with sigma_i >= kRankRatio * sigma_max.
Index numerical_rank(const Matrix& m, double ratio = kRankRatio);

/// True when the n x N matrix has rank n under the singular-value ratio test.
bool has_full_row_rank(const Matrix& x, double ratio = kRankRatio);

/// Columns of `x` listed in `cols`, in order.
Matrix select_columns(const Matrix& x, std::span<const Index> cols);
Vector select_entries(const Vector& v, std::span<const Index> idx);

/// {0..n-1} minus `idx` (idx sorted).
IndexSet complement(std::span<const Index> idx, Index n);

/// Orthonormal basis of the column space, using the same rank rule.
Matrix range_basis(const Matrix& m, double ratio = kRankRatio);

/// Orthonormal basis of the null space of m^T (vectors orthogonal to all columns of m).
Matrix left_null_basis(const Matrix& m, double ratio = kRankRatio);

/// Orthogonal projector P = X^T (X X^T)^{-1} X for a full-row-rank X (N x N).
Matrix hat_matrix(const Matrix& x);

/// Psi = I - X^T (X X^T)^{-1} X.
Matrix residual_projector(const Matrix& x);

bool all_finite(const Matrix& m);

double median(std::vector<double> values);

}  // namespace robl1
