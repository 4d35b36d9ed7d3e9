#include "robl1/linalg.hpp"

#include "robl1/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace robl1 {

namespace {

Eigen::JacobiSVD<Matrix> thin_svd(const Matrix& m, unsigned options) {
  return Eigen::JacobiSVD<Matrix>(m, options);
}

Index rank_from_singular_values(const Vector& sv, double ratio) {
  if (sv.size() == 0 || !(sv(0) > 0.0)) return 0;
  const double cutoff = ratio * sv(0);
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) >= cutoff) ++r;
  }
  return r;
}

}  // namespace

Index numerical_rank(const Matrix& m, double ratio) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  // Jacobi on the tall orientation keeps the cost at O(max * min^2).
  const Vector sv = m.rows() >= m.cols() ? thin_svd(m, 0).singularValues()
                                         : thin_svd(m.transpose(), 0).singularValues();
  return rank_from_singular_values(sv, ratio);
}

bool has_full_row_rank(const Matrix& x, double ratio) {
  return x.rows() > 0 && x.cols() >= x.rows() && numerical_rank(x, ratio) == x.rows();
}

Matrix select_columns(const Matrix& x, std::span<const Index> cols) {
  Matrix out(x.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = x.col(cols[j]);
  return out;
}

Vector select_entries(const Vector& v, std::span<const Index> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out(static_cast<Index>(j)) = v(idx[j]);
  return out;
}

IndexSet complement(std::span<const Index> idx, Index n) {
  std::vector<char> mark(static_cast<std::size_t>(n), 0);
  for (Index i : idx) mark[static_cast<std::size_t>(i)] = 1;
  IndexSet out;
  out.reserve(static_cast<std::size_t>(n) - idx.size());
  for (Index i = 0; i < n; ++i) {
    if (!mark[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

Matrix range_basis(const Matrix& m, double ratio) {
  if (m.rows() == 0) return Matrix(0, 0);
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  auto svd = thin_svd(m, Eigen::ComputeThinU);
  const Index r = rank_from_singular_values(svd.singularValues(), ratio);
  return svd.matrixU().leftCols(r);
}

Matrix left_null_basis(const Matrix& m, double ratio) {
  const Index rows = m.rows();
  if (m.cols() == 0) return Matrix::Identity(rows, rows);
  auto svd = thin_svd(m, Eigen::ComputeFullU);
  const Index r = rank_from_singular_values(svd.singularValues(), ratio);
  return svd.matrixU().rightCols(rows - r);
}

Matrix hat_matrix(const Matrix& x) {
  if (!has_full_row_rank(x)) throw NumericalError("hat_matrix: X does not have full row rank");
  // P = Q Q^T with Q an orthonormal basis of range(X^T); better conditioned than (X X^T)^{-1}.
  const Eigen::HouseholderQR<Matrix> qr(x.transpose());
  const Matrix q = qr.householderQ() * Matrix::Identity(x.cols(), x.rows());
  return q * q.transpose();
}

Matrix residual_projector(const Matrix& x) {
  return Matrix::Identity(x.cols(), x.cols()) - hat_matrix(x);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty sample");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  double m = *mid;
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), mid));
  }
  return m;
}

}  // namespace robl1
