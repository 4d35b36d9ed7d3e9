#include "robl1/lad.hpp"

#include "robl1/errors.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace robl1 {

namespace {

struct Breakpoint {
  double step;
  Index sample;
  double slope_increase;
};

/// Greedy choice of n independent samples, preferring small least-squares residuals and
/// positive weights. Independence is tested by Gram-Schmidt against the accepted set.
IndexSet initial_basis(const Matrix& x, const Vector& y, const Vector& w) {
  const Index n = x.rows();
  const Index samples = x.cols();
  Vector theta = Vector::Zero(n);
  {
    Matrix xw = x;
    Vector yw = y;
    for (Index t = 0; t < samples; ++t) {
      const double s = w(t) > 0.0 ? 1.0 : 0.0;
      xw.col(t) *= s;
      yw(t) *= s;
    }
    const Eigen::ColPivHouseholderQR<Matrix> qr(xw.transpose());
    if (qr.rank() == n) theta = qr.solve(yw);
  }
  const Vector r = (y - x.transpose() * theta).cwiseAbs();
  std::vector<Index> order(static_cast<std::size_t>(samples));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const bool pa = w(a) > 0.0;
    const bool pb = w(b) > 0.0;
    if (pa != pb) return pa;
    return r(a) < r(b);
  });

  IndexSet basis;
  Matrix q(n, n);
  for (Index t : order) {
    const double norm = x.col(t).norm();
    if (norm == 0.0) continue;
    Vector v = x.col(t) / norm;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < static_cast<Index>(basis.size()); ++k) v -= q.col(k).dot(v) * q.col(k);
    }
    const double rest = v.norm();
    if (rest < 1e-6) continue;
    q.col(static_cast<Index>(basis.size())) = v / rest;
    basis.push_back(t);
    if (static_cast<Index>(basis.size()) == n) break;
  }
  if (static_cast<Index>(basis.size()) < n)
    throw NumericalError("weighted l1: regressor matrix is rank deficient");
  return basis;
}

}  // namespace

LadResult minimize_weighted_l1(const Matrix& x, const Vector& y, const Vector& weights,
                               int max_iter) {
  const Index n = x.rows();
  const Index samples = x.cols();
  if (y.size() != samples || weights.size() != samples)
    throw InvalidArgument("weighted l1: y, weights and X disagree on the sample count");
  if (n < 1) throw InvalidArgument("weighted l1: empty parameter vector");
  if ((weights.array() < 0.0).any()) throw InvalidArgument("weighted l1: negative weight");

  IndexSet basis = initial_basis(x, y, weights);
  std::vector<char> in_basis(static_cast<std::size_t>(samples), 0);
  for (Index t : basis) in_basis[static_cast<std::size_t>(t)] = 1;

  // Residual signs assumed for non-basic samples; only consulted when r_t == 0.
  Vector sign = Vector::Ones(samples);
  const double wmean = weights.sum() / static_cast<double>(samples);
  const Vector x_abs_colsum = x.cwiseAbs().colwise().sum().transpose();

  LadResult result;
  Matrix xb(n, n);
  Vector theta(n);
  Vector lambda(n);
  Vector r(samples);
  std::vector<char> is_zero(static_cast<std::size_t>(samples), 0);
  std::vector<Breakpoint> bps;
  bps.reserve(static_cast<std::size_t>(samples));

  bool bland = false;
  int stalled = 0;
  double last_objective = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= max_iter; ++iter) {
    for (Index k = 0; k < n; ++k) xb.col(k) = x.col(basis[static_cast<std::size_t>(k)]);
    const Eigen::PartialPivLU<Matrix> lu(xb);
    Vector yb(n);
    for (Index k = 0; k < n; ++k) yb(k) = y(basis[static_cast<std::size_t>(k)]);
    theta = lu.transpose().solve(yb);
    if (!theta.allFinite()) throw NumericalError("weighted l1: singular vertex system");

    r.noalias() = y - x.transpose() * theta;
    const Vector theta_abs = theta.cwiseAbs();
    Vector g = Vector::Zero(n);
    double objective = 0.0;
    for (Index t = 0; t < samples; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      if (in_basis[ut]) {
        r(t) = 0.0;
        is_zero[ut] = 1;
        continue;
      }
      const double scale = std::abs(y(t)) + x.col(t).cwiseAbs().dot(theta_abs);
      is_zero[ut] = std::abs(r(t)) <= 1e-11 * scale ? 1 : 0;
      if (!is_zero[ut]) sign(t) = r(t) > 0.0 ? 1.0 : -1.0;
      objective += weights(t) * std::abs(r(t));
      if (weights(t) > 0.0) g.noalias() -= (weights(t) * sign(t)) * x.col(t);
    }
    lambda = lu.solve(g);

    // Leaving sample: basic multiplier outside [-w_i, w_i].
    Index leave = -1;
    double worst = 0.0;
    for (Index k = 0; k < n; ++k) {
      const Index t = basis[static_cast<std::size_t>(k)];
      const double violation = std::abs(lambda(k)) - weights(t);
      if (violation <= 1e-10 * std::max(weights(t), wmean) * (1.0 + x_abs_colsum(t))) continue;
      if (bland) {
        if (leave < 0 || t < basis[static_cast<std::size_t>(leave)]) leave = k;
      } else if (violation > worst) {
        worst = violation;
        leave = k;
      }
    }
    if (leave < 0) {
      result.converged = true;
      result.iterations = iter;
      break;
    }
    if (iter == max_iter) {
      result.iterations = iter;
      break;
    }

    if (objective < last_objective - 1e-13 * (1.0 + std::abs(objective))) {
      stalled = 0;
      last_objective = objective;
    } else if (++stalled > 50) {
      bland = true;
    }

    const double sigma = lambda(leave) > 0.0 ? -1.0 : 1.0;
    Vector unit = Vector::Zero(n);
    unit(leave) = sigma;
    const Vector direction = lu.transpose().solve(unit);

    bps.clear();
    for (Index t = 0; t < samples; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      if (in_basis[ut] || weights(t) <= 0.0) continue;
      const double a = x.col(t).dot(direction);
      if (a == 0.0) continue;
      if ((a > 0.0) != (sign(t) > 0.0)) continue;  // |r_t| grows along the edge
      const double step = is_zero[ut] ? 0.0 : std::max(r(t) / a, 0.0);
      bps.push_back({step, t, 2.0 * weights(t) * std::abs(a)});
    }
    std::sort(bps.begin(), bps.end(), [](const Breakpoint& p, const Breakpoint& q) {
      return p.step < q.step || (p.step == q.step && p.sample < q.sample);
    });

    const Index leaving_sample = basis[static_cast<std::size_t>(leave)];
    double slope = weights(leaving_sample) - std::abs(lambda(leave));
    Index enter = -1;
    std::size_t passed = 0;
    for (; passed < bps.size(); ++passed) {
      slope += bps[passed].slope_increase;
      if (slope >= 0.0) {
        enter = bps[passed].sample;
        break;
      }
    }
    if (enter < 0) throw NumericalError("weighted l1: objective unbounded along an edge");
    for (std::size_t k = 0; k < passed; ++k) sign(bps[k].sample) = -sign(bps[k].sample);

    sign(leaving_sample) = lambda(leave) > 0.0 ? 1.0 : -1.0;
    in_basis[static_cast<std::size_t>(leaving_sample)] = 0;
    in_basis[static_cast<std::size_t>(enter)] = 1;
    basis[static_cast<std::size_t>(leave)] = enter;
    result.iterations = iter + 1;
  }

  result.theta = theta;
  result.dual.resize(samples);
  for (Index t = 0; t < samples; ++t) {
    result.dual(t) = is_zero[static_cast<std::size_t>(t)] ? sign(t) : (r(t) > 0.0 ? 1.0 : -1.0);
  }
  for (Index k = 0; k < n; ++k) {
    const Index t = basis[static_cast<std::size_t>(k)];
    result.dual(t) = weights(t) > 0.0 ? std::clamp(lambda(k) / weights(t), -1.0, 1.0) : 0.0;
  }
  result.basis = basis;
  std::sort(result.basis.begin(), result.basis.end());
  return result;
}

}  // namespace robl1
