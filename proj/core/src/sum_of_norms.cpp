#include "robl1/certificates.hpp"
#include "robl1/errors.hpp"
#include "robl1/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace robl1 {

double sum_of_norms_objective(const MultiDataset& data, const Matrix& a) {
  return (data.outputs - a * data.regressors).colwise().norm().sum();
}

namespace {

MatrixEstimate make_matrix_estimate(const MultiDataset& data, const Matrix& a) {
  MatrixEstimate est;
  est.a = a;
  est.residuals = data.outputs - a * data.regressors;
  est.objective = est.residuals.colwise().norm().sum();
  return est;
}

/// Refit on the columns flagged as exact fits and keep the refit when T3 certifies it.
std::optional<Matrix> polish(const MultiDataset& data, const IndexSet& zero, double opt_tol) {
  if (static_cast<Index>(zero.size()) < data.dim()) return std::nullopt;
  const Matrix x0 = select_columns(data.regressors, zero);
  if (!has_full_row_rank(x0)) return std::nullopt;
  Matrix y0(data.outputs_dim(), x0.cols());
  for (std::size_t j = 0; j < zero.size(); ++j) y0.col(static_cast<Index>(j)) = data.outputs.col(zero[j]);
  const Matrix a0 = x0.transpose().colPivHouseholderQr().solve(y0.transpose()).transpose();
  if (!a0.allFinite()) return std::nullopt;
  if (t3_value(data, a0) <= 1.0 + opt_tol) return a0;
  return std::nullopt;
}

}  // namespace

MatrixEstimate solve_sum_of_norms(const MultiDataset& data, const SolverOptions& opts) {
  opts.validate();
  data.validate();
  if (!all_finite(data.regressors) || !all_finite(data.outputs))
    throw InvalidArgument("non-finite regressors or outputs");
  if (!has_full_row_rank(data.regressors))
    throw NumericalError("regressor matrix X is rank deficient (rank < n)");
  const Matrix& x = data.regressors;
  const Matrix& y = data.outputs;
  const Index samples = data.samples();

  const Eigen::HouseholderQR<Matrix> qr(x.transpose());
  const auto fit = [&](const Matrix& target) -> Matrix {
    return qr.solve(target.transpose()).transpose();
  };

  Matrix a = fit(y);
  Matrix r = y - a * x;
  std::vector<double> norms(static_cast<std::size_t>(samples));
  for (Index t = 0; t < samples; ++t) norms[static_cast<std::size_t>(t)] = r.col(t).norm();
  const double scale = 1.0 + y.cwiseAbs().maxCoeff();
  double rho = 1.0 / (median(norms) + 1e-12 * scale);
  Matrix u = Matrix::Zero(y.rows(), samples);
  constexpr double kRelax = 1.6;

  IndexSet last_tried;
  const auto attempt = [&](const IndexSet& zero) -> std::optional<Matrix> {
    if (zero == last_tried) return std::nullopt;
    last_tried = zero;
    return polish(data, zero, opts.opt_tol);
  };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    a = fit(y - r - u);
    const Matrix ax = a * x;
    const Matrix ax_hat = kRelax * ax + (1.0 - kRelax) * (y - r);
    const Matrix r_old = r;
    const Matrix v = y - ax_hat - u;
    for (Index t = 0; t < samples; ++t) {
      const double nv = v.col(t).norm();
      const double keep = nv > 1.0 / rho ? 1.0 - 1.0 / (rho * nv) : 0.0;
      r.col(t) = keep * v.col(t);
    }
    u += ax_hat + r - y;

    const double primal = (ax + r - y).norm();
    const double dual = rho * ((r - r_old) * x.transpose()).norm();
    if (iter % 10 == 9) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u /= 2.0;
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u *= 2.0;
      }
    }
    const bool converged = primal <= opts.opt_tol * scale * std::sqrt(static_cast<double>(samples)) &&
                           dual <= opts.opt_tol * scale * std::sqrt(static_cast<double>(samples));
    if (iter % 50 == 49 || converged) {
      IndexSet zero;
      for (Index t = 0; t < samples; ++t) {
        if (r.col(t).squaredNorm() == 0.0) zero.push_back(t);
      }
      if (auto a0 = attempt(zero)) {
        MatrixEstimate est = make_matrix_estimate(data, *a0);
        est.iterations = iter + 1;
        return est;
      }
      const Matrix res = y - a * x;
      IndexSet near;
      for (Index t = 0; t < samples; ++t) {
        if (res.col(t).norm() <= 1e-4 * (1.0 + y.col(t).norm())) near.push_back(t);
      }
      if (auto a0 = attempt(near)) {
        MatrixEstimate est = make_matrix_estimate(data, *a0);
        est.iterations = iter + 1;
        return est;
      }
    }
    if (converged) {
      ++iter;
      break;
    }
  }

  MatrixEstimate est = make_matrix_estimate(data, a);
  est.iterations = iter;
  est.status = t3_value(data, a) <= 1.0 + opts.opt_tol ? SolveStatus::optimal
                                                        : SolveStatus::iteration_limit;
  return est;
}

namespace {

double distance_sum(const Matrix& pts, const Vector& a) {
  return (pts.colwise() - a).colwise().norm().sum();
}

/// Sum of unit vectors (y_t - a)/||y_t - a|| over points not coincident with a, and the
/// number of coincident points.
Vector unit_sum(const Matrix& pts, const Vector& a, double coincide, Index& multiplicity) {
  Vector g = Vector::Zero(a.size());
  multiplicity = 0;
  for (Index t = 0; t < pts.cols(); ++t) {
    const Vector d = pts.col(t) - a;
    const double nd = d.norm();
    if (nd <= coincide) {
      ++multiplicity;
    } else {
      g += d / nd;
    }
  }
  return g;
}

}  // namespace

Vector geometric_median(const Matrix& points, const SolverOptions& opts) {
  opts.validate();
  if (points.cols() < 1 || points.rows() < 1) throw InvalidArgument("at least one point is required");
  if (!all_finite(points)) throw InvalidArgument("non-finite point");
  const Index count = points.cols();
  const double spread = 1.0 + points.cwiseAbs().maxCoeff();
  const double coincide = 1e-13 * spread;

  // A data point is optimal iff the unit vectors from the others sum to at most its
  // multiplicity.
  const auto certify_point = [&](Index t) {
    Index mult = 0;
    const Vector g = unit_sum(points, points.col(t), coincide, mult);
    return g.norm() <= static_cast<double>(mult) + opts.opt_tol;
  };
  const auto nearest_point = [&](const Vector& a) {
    Index best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (Index t = 0; t < count; ++t) {
      const double d = (points.col(t) - a).squaredNorm();
      if (d < dist) {
        dist = d;
        best = t;
      }
    }
    return best;
  };

  if (count == 1) return points.col(0);
  Vector a = points.rowwise().mean();
  double f = distance_sum(points, a);
  {
    const Index t = nearest_point(a);
    if (certify_point(t)) return points.col(t);
  }

  Index last_checked = -1;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    Index mult = 0;
    const Vector g = unit_sum(points, a, coincide, mult);
    const double gn = g.norm();
    if (mult == 0 && gn <= opts.opt_tol) break;
    if (mult > 0 && gn <= static_cast<double>(mult) + opts.opt_tol) break;

    // Vardi-Zhang modified Weiszfeld step.
    Vector num = Vector::Zero(a.size());
    double den = 0.0;
    for (Index t = 0; t < count; ++t) {
      const double d = (points.col(t) - a).norm();
      if (d <= coincide) continue;
      num += points.col(t) / d;
      den += 1.0 / d;
    }
    const Vector tw = num / den;
    Vector next;
    if (mult == 0) {
      next = tw;
    } else {
      const double ratio = static_cast<double>(mult) / gn;
      next = std::max(0.0, 1.0 - ratio) * tw + std::min(1.0, ratio) * a;
    }

    // Newton polish away from data points; the Hessian is singular for collinear data.
    if (mult == 0) {
      Matrix hess = Matrix::Zero(a.size(), a.size());
      for (Index t = 0; t < count; ++t) {
        const Vector d = points.col(t) - a;
        const double nd = d.norm();
        const Vector ud = d / nd;
        hess += (Matrix::Identity(a.size(), a.size()) - ud * ud.transpose()) / nd;
      }
      const Eigen::LDLT<Matrix> ldlt(hess);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
          ldlt.vectorD().minCoeff() > 1e-12 * ldlt.vectorD().maxCoeff()) {
        const Vector step = ldlt.solve(g);
        double tau = 1.0;
        for (int ls = 0; ls < 40; ++ls) {
          const Vector cand = a + tau * step;
          if (distance_sum(points, cand) < distance_sum(points, next)) {
            next = cand;
            break;
          }
          tau *= 0.5;
        }
      }
    }

    const double fn = distance_sum(points, next);
    if (fn > f && mult == 0) break;
    const Index t = nearest_point(next);
    if (t != last_checked && (points.col(t) - next).norm() <= 1e-3 * spread) {
      last_checked = t;
      if (certify_point(t)) return points.col(t);
    }
    if ((next - a).norm() <= 1e-16 * spread) {
      a = next;
      break;
    }
    a = next;
    f = fn;
  }
  return a;
}

}  // namespace robl1
