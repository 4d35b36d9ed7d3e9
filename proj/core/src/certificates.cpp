#include "robl1/certificates.hpp"

#include "robl1/errors.hpp"
#include "robl1/lad.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace robl1 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_theta(const Dataset& data, const Vector& theta) {
  if (theta.size() != data.dim())
    throw InvalidArgument("theta has length " + std::to_string(theta.size()) + ", expected " +
                          std::to_string(data.dim()));
  if (!theta.allFinite()) throw InvalidArgument("theta is not finite");
}

}  // namespace

S3Result s3_value(const Dataset& data, const Vector& theta, double partition_tol) {
  data.validate();
  check_theta(data, theta);
  const Matrix& x = data.regressors;
  const Index n = data.dim();

  S3Result out;
  out.partition = partition_indices(data, theta, partition_tol);
  out.z = Vector::Zero(n);
  double mass = 0.0;
  for (Index t : out.partition.plus) {
    out.z += x.col(t);
    mass += x.col(t).norm();
  }
  for (Index t : out.partition.minus) {
    out.z -= x.col(t);
    mass += x.col(t).norm();
  }
  const IndexSet& zero = out.partition.zero;
  const auto k = static_cast<Index>(zero.size());
  if (out.z.norm() <= 1e-12 * (1.0 + mass)) {
    out.z.setZero();
    out.value = 0.0;
    out.lambda = Vector::Zero(k);
    return out;
  }
  if (k == 0) {
    out.value = kInf;
    return out;
  }

  const Matrix x0 = select_columns(x, zero);
  const Matrix basis = range_basis(x0);
  const Index r = basis.cols();
  const Vector zr = basis.transpose() * out.z;
  if ((out.z - basis * zr).norm() > 1e-9 * out.z.norm()) {
    out.value = kInf;
    return out;
  }

  // Dual LP: m* = min sum_{I0} |x_t^T eta| s.t. z^T eta = 1, restricted to range(X_{I0}).
  // Writing eta = z'/|z'|^2 + Q w with Q spanning z'-perp turns it into an unweighted LAD.
  const Matrix xr = basis.transpose() * x0;  // r x k
  const Vector anchor = zr / zr.squaredNorm();
  Vector signs(k);
  double m_star = 0.0;
  if (r == 1) {
    const Vector proj = xr.transpose() * anchor;
    for (Index j = 0; j < k; ++j) signs(j) = proj(j) > 0.0 ? 1.0 : (proj(j) < 0.0 ? -1.0 : 0.0);
    m_star = proj.cwiseAbs().sum();
    out.eta = basis * anchor;
  } else {
    const Eigen::HouseholderQR<Matrix> qr(zr);
    const Matrix q_full = qr.householderQ();
    const Matrix q = q_full.rightCols(r - 1);
    const Matrix design = -(q.transpose() * xr);  // (r-1) x k
    const Vector target = xr.transpose() * anchor;
    const LadResult lad = minimize_weighted_l1(design, target, Vector::Ones(k));
    if (!lad.converged) throw NumericalError("certificate LP did not converge");
    signs = lad.dual;
    m_star = (target - design.transpose() * lad.theta).cwiseAbs().sum();
    out.eta = basis * (anchor + q * lad.theta);
  }
  if (!(m_star > 0.0)) {
    out.value = kInf;
    return out;
  }
  out.lambda = signs / m_star;
  out.value = 1.0 / m_star;
  return out;
}

namespace {

/// Borderline S2' value: the objective is piecewise linear with slope m* - 1 along -eta, so
/// a step short of the first kink shows directly whether another minimizer exists.
bool flat_along(const Dataset& data, const S3Result& s3, const Vector& theta) {
  if (s3.eta.size() != data.dim()) return false;
  const Vector r = data.regressors.transpose() * theta - data.outputs;
  const Vector slope = -(data.regressors.transpose() * s3.eta);
  double step = 1.0;
  for (Index t = 0; t < r.size(); ++t) {
    if (std::binary_search(s3.partition.zero.begin(), s3.partition.zero.end(), t)) continue;
    if (slope(t) != 0.0 && (r(t) > 0.0) != (slope(t) > 0.0)) step = std::min(step, std::abs(r(t) / slope(t)));
  }
  step *= 0.5;
  const double base = l1_objective(data, theta);
  const double moved = l1_objective(data, theta - step * s3.eta);
  return step > 0.0 && moved <= base + 1e-12 * (1.0 + base);
}

UniquenessResult decide_uniqueness(const Dataset& data, const S3Result& s3, const Vector& theta,
                                   double tol) {
  UniquenessResult out;
  const IndexSet& zero = s3.partition.zero;
  const Index n = data.dim();
  out.evidence.rank_i0 = zero.empty() ? 0 : numerical_rank(select_columns(data.regressors, zero));
  for (std::size_t j = 0; j < zero.size(); ++j) {
    if (static_cast<Index>(j) < s3.lambda.size() && std::abs(s3.lambda(static_cast<Index>(j))) < 1.0 - tol)
      out.s1prime_set.push_back(zero[j]);
  }
  if (zero.empty() || out.evidence.rank_i0 < n) {
    out.verdict = Uniqueness::non_unique;
    if (!s3.z.isZero(0.0) && std::isfinite(s3.value) && s3.value > 0.0)
      out.evidence.s2prime_lp_value = 1.0 / s3.value;
    return out;
  }
  if (s3.z.isZero(0.0)) {
    out.verdict = Uniqueness::unique;
    return out;
  }
  const double m_star = 1.0 / s3.value;
  out.evidence.s2prime_lp_value = m_star;
  if (m_star > 1.0 + tol) {
    out.verdict = Uniqueness::unique;
  } else if (m_star < 1.0 - tol) {
    out.verdict = Uniqueness::non_unique;
  } else if (flat_along(data, s3, theta)) {
    out.verdict = Uniqueness::non_unique;
  } else {
    out.verdict = Uniqueness::indeterminate;
  }
  return out;
}

}  // namespace

Certificate check_optimal(const Dataset& data, const Vector& theta, double tol,
                          double partition_tol) {
  const S3Result s3 = s3_value(data, theta, partition_tol);
  Certificate cert;
  cert.tol = tol;
  cert.s3_value = s3.value;
  cert.lambda_coeffs = s3.lambda;
  cert.partition = s3.partition;
  cert.optimal = s3.value <= 1.0 + tol;
  if (cert.optimal) {
    const UniquenessResult u = decide_uniqueness(data, s3, theta, tol);
    cert.uniqueness = u.verdict;
    cert.rank_evidence = u.evidence;
    cert.s1prime_set = u.s1prime_set;
    if (u.verdict != Uniqueness::indeterminate) cert.unique = u.verdict == Uniqueness::unique;
  } else {
    const IndexSet& zero = s3.partition.zero;
    cert.rank_evidence.rank_i0 =
        zero.empty() ? 0 : numerical_rank(select_columns(data.regressors, zero));
  }
  return cert;
}

UniquenessResult check_unique(const Dataset& data, const Vector& theta, double tol,
                              double partition_tol) {
  const S3Result s3 = s3_value(data, theta, partition_tol);
  if (!(s3.value <= 1.0 + tol))
    throw InvalidArgument("uniqueness requested for a non-optimal theta (s3 = " +
                          std::to_string(s3.value) + ")");
  return decide_uniqueness(data, s3, theta, tol);
}

bool affine_necessary(const Dataset& data, const Vector& theta, double partition_tol) {
  data.validate();
  check_theta(data, theta);
  const Index last = data.dim() - 1;
  if ((data.regressors.row(last).array() - 1.0).abs().maxCoeff() > 1e-12)
    throw InvalidArgument("affine condition needs a constant-one last regressor row");
  const IndexPartition p = partition_indices(data, theta, partition_tol);
  const auto plus = static_cast<long long>(p.plus.size());
  const auto minus = static_cast<long long>(p.minus.size());
  return std::llabs(plus - minus) <= static_cast<long long>(p.zero.size());
}

namespace {

/// Log-barrier path for  min s  s.t.  ||beta_t|| <= s,  sum_t beta_t x_t^T = c,
/// with x (r x k) of full row rank and a feasible start b (m x k).
double min_max_column_norm(const Matrix& x, const Matrix& c, Matrix& b, double inner_tol,
                           double& gap_out) {
  const Index m = c.rows();
  const Index r = x.rows();
  const Index k = x.cols();
  const Index dim = m * r;

  double s = 0.0;
  for (Index t = 0; t < k; ++t) s = std::max(s, b.col(t).norm());
  s = 1.5 * s + 1e-3 * (s + 1e-300);
  double kappa = 2.0 * static_cast<double>(k) / s;
  const Eigen::LDLT<Matrix> gram(x * x.transpose());

  std::vector<Matrix> dinv(static_cast<std::size_t>(k), Matrix(m, m));
  Matrix p(m, k), q(m, k);

  const auto barrier = [&](const Matrix& bb, double ss, double& f) {
    f = kappa * ss;
    for (Index t = 0; t < k; ++t) {
      const double g = ss * ss - bb.col(t).squaredNorm();
      if (!(g > 0.0) || ss <= 0.0) return false;
      f -= std::log(g);
    }
    return true;
  };

  for (int outer = 0; outer < 200; ++outer) {
    for (int newton = 0; newton < 200; ++newton) {
      Matrix grad_b(m, k), h(m, k);
      double grad_s = kappa;
      double hss = 0.0;
      Matrix schur = Matrix::Zero(dim, dim);
      Matrix a_t(m, k), b_t(m, k);
      for (Index t = 0; t < k; ++t) {
        const Vector beta = b.col(t);
        const double g = s * s - beta.squaredNorm();
        grad_b.col(t) = (2.0 / g) * beta;
        grad_s -= 2.0 * s / g;
        h.col(t) = (-4.0 * s / (g * g)) * beta;
        hss += -2.0 / g + 4.0 * s * s / (g * g);
        const double aa = 2.0 / g;
        const double bb = 4.0 / (g * g);
        Matrix& di = dinv[static_cast<std::size_t>(t)];
        di = (Matrix::Identity(m, m) - (bb / (aa + bb * beta.squaredNorm())) * beta * beta.transpose()) / aa;
        a_t.col(t) = -(di * grad_b.col(t));
        b_t.col(t) = di * h.col(t);
        const Matrix xx = x.col(t) * x.col(t).transpose();
        for (Index j = 0; j < r; ++j) {
          for (Index jj = 0; jj < r; ++jj) schur.block(j * m, jj * m, m, m) += xx(j, jj) * di;
        }
      }
      const Eigen::LDLT<Matrix> ldlt(schur);
      // Direction base - D_t nu x_t with sum_t dir_t x_t^T = target.
      const auto project = [&](const Matrix& base, const Matrix& target, Matrix& dir) {
        const Matrix miss = base * x.transpose() - target;
        const Vector nu = ldlt.solve(Eigen::Map<const Vector>(miss.data(), dim));
        const Eigen::Map<const Matrix> nm(nu.data(), m, r);
        dir = base;
        for (Index t = 0; t < k; ++t) dir.col(t) -= dinv[static_cast<std::size_t>(t)] * (nm * x.col(t));
      };
      const Matrix restore = c - b * x.transpose();
      project(a_t, restore, p);
      project(b_t, Matrix::Zero(m, r), q);
      double hp = 0.0, hq = 0.0;
      for (Index t = 0; t < k; ++t) {
        hp += h.col(t).dot(p.col(t));
        hq += h.col(t).dot(q.col(t));
      }
      const double ds = (-grad_s - hp) / (hss - hq);
      Matrix db = p - ds * q;
      // The Schur solve degrades near the boundary and a large ds amplifies it; a Euclidean
      // projection (independent of the barrier scaling) keeps B X^T = C exact.
      db -= gram.solve((db * x.transpose() - restore).transpose()).transpose() * x;
      const double slope = (grad_b.array() * db.array()).sum() + grad_s * ds;
      if (!std::isfinite(slope) || -slope <= 1e-13) break;

      double f0 = 0.0;
      barrier(b, s, f0);
      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        double f1 = 0.0;
        const Matrix b1 = b + step * db;
        const double s1 = s + step * ds;
        if (barrier(b1, s1, f1) && f1 <= f0 + 0.25 * step * slope) {
          b = b1;
          s = s1;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    const double gap = 2.0 * static_cast<double>(k) / kappa;
    gap_out = gap;
    if (gap <= inner_tol * std::max(1.0, s)) break;
    kappa *= 8.0;
  }
  double best = 0.0;
  for (Index t = 0; t < k; ++t) best = std::max(best, b.col(t).norm());
  return best;
}

}  // namespace

T3Result t3_solve(const MultiDataset& data, const Matrix& a, double partition_tol,
                  double inner_tol) {
  data.validate();
  if (a.rows() != data.outputs_dim() || a.cols() != data.dim())
    throw InvalidArgument("A must be m x n");
  if (!a.allFinite()) throw InvalidArgument("A is not finite");
  const Matrix& x = data.regressors;
  const Index m = data.outputs_dim();
  const Matrix resid = data.outputs - a * x;

  T3Result out;
  Matrix c = Matrix::Zero(m, data.dim());
  double mass = 0.0;
  for (Index t = 0; t < data.samples(); ++t) {
    const double rn = resid.col(t).norm();
    if (rn <= partition_tol * (1.0 + data.outputs.col(t).norm())) {
      out.zero.push_back(t);
    } else {
      c += (resid.col(t) / rn) * x.col(t).transpose();
      mass += x.col(t).norm();
    }
  }
  const auto k = static_cast<Index>(out.zero.size());
  if (c.norm() <= 1e-12 * (1.0 + mass)) {
    out.value = 0.0;
    out.beta = Matrix::Zero(m, k);
    return out;
  }
  if (k == 0) {
    out.value = kInf;
    return out;
  }
  const Matrix x0 = select_columns(x, out.zero);
  const Matrix basis = range_basis(x0);
  const Matrix cr = c * basis;
  if ((c - cr * basis.transpose()).norm() > 1e-9 * c.norm()) {
    out.value = kInf;
    return out;
  }
  const Matrix xr = basis.transpose() * x0;
  // Least-norm feasible start: B = C' (X X^T)^{-1} X.
  Matrix b = (xr * xr.transpose()).ldlt().solve(cr.transpose()).transpose() * xr;
  out.value = min_max_column_norm(xr, cr, b, inner_tol, out.gap);
  out.beta = b;
  return out;
}

double t3_value(const MultiDataset& data, const Matrix& a, double partition_tol) {
  return t3_solve(data, a, partition_tol).value;
}

bool check_regularized_kkt(const Dataset& data, double lambda, const RegularizedSolution& sol,
                           double tol) {
  data.validate();
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (sol.theta.size() != data.dim() || sol.phi.size() != data.samples())
    throw InvalidArgument("solution dimensions do not match the dataset");
  const Matrix& x = data.regressors;
  const Vector& y = data.outputs;
  const double scale = tol * (1.0 + y.cwiseAbs().maxCoeff());

  const Vector fit_gap = y - sol.phi - x.transpose() * sol.theta;
  Vector s(data.samples());
  for (Index t = 0; t < data.samples(); ++t) {
    s(t) = sol.phi(t) != 0.0 ? (sol.phi(t) > 0.0 ? 1.0 : -1.0)
                             : std::clamp(fit_gap(t) / lambda, -1.0, 1.0);
  }
  const double eq1 = (x * fit_gap).cwiseAbs().maxCoeff();
  const double eq2 = (lambda * s - fit_gap).cwiseAbs().maxCoeff();
  const double xs = (x * s).cwiseAbs().maxCoeff();
  return eq1 <= scale && eq2 <= scale && xs <= scale * (1.0 + 1.0 / lambda);
}

bool check_regularized_unique(const Dataset& data, const RegularizedSolution& sol) {
  data.validate();
  if (!has_full_row_rank(data.regressors)) return false;
  if (sol.support.empty()) return true;
  const auto k = static_cast<Index>(sol.support.size());
  if (k > data.samples() - data.dim()) return false;
  const Matrix psi = residual_projector(data.regressors);
  return numerical_rank(select_columns(psi, sol.support)) == k;
}

const char* to_string(Uniqueness u) {
  switch (u) {
    case Uniqueness::unique:
      return "unique";
    case Uniqueness::non_unique:
      return "non_unique";
    case Uniqueness::indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

}  // namespace robl1
