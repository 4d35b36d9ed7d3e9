#include "robl1/solvers.hpp"

#include "robl1/certificates.hpp"
#include "robl1/errors.hpp"
#include "robl1/lad.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

namespace robl1 {

void SolverOptions::validate() const {
  if (!(opt_tol > 0.0)) throw InvalidArgument("opt_tol must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
}

namespace {

void require_solvable(const Dataset& data) {
  data.validate();
  if (!all_finite(data.regressors) || !data.outputs.allFinite())
    throw InvalidArgument("non-finite regressors or outputs");
  if (!has_full_row_rank(data.regressors))
    throw NumericalError("regressor matrix X is rank deficient (rank < n)");
}

Estimate make_estimate(const Dataset& data, const Vector& theta, const Vector& weights) {
  Estimate est;
  est.theta = theta;
  est.residuals = data.outputs - data.regressors.transpose() * theta;
  est.objective = weights.size() == 0 ? est.residuals.cwiseAbs().sum()
                                      : weights.dot(est.residuals.cwiseAbs());
  return est;
}

Vector soft_threshold(const Vector& v, const Vector& thresh) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i)) - thresh(i);
    out(i) = a > 0.0 ? std::copysign(a, v(i)) : 0.0;
  }
  return out;
}

/// Interpolates n independent samples with the smallest |r_t| (positive weights first).
std::optional<Vector> interpolate_smallest(const Matrix& x, const Vector& y, const Vector& r,
                                           const Vector& w) {
  const Index n = x.rows();
  std::vector<Index> order(static_cast<std::size_t>(x.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if ((w(a) > 0.0) != (w(b) > 0.0)) return w(a) > 0.0;
    return std::abs(r(a)) < std::abs(r(b));
  });
  IndexSet chosen;
  Matrix q(n, n);
  for (Index t : order) {
    const double norm = x.col(t).norm();
    if (norm == 0.0) continue;
    Vector v = x.col(t) / norm;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < static_cast<Index>(chosen.size()); ++k) v -= q.col(k).dot(v) * q.col(k);
    }
    if (v.norm() < 1e-6) continue;
    q.col(static_cast<Index>(chosen.size())) = v.normalized();
    chosen.push_back(t);
    if (static_cast<Index>(chosen.size()) == n) break;
  }
  if (static_cast<Index>(chosen.size()) < n) return std::nullopt;
  const Matrix xb = select_columns(x, chosen);
  return Vector(xb.transpose().partialPivLu().solve(select_entries(y, chosen)));
}

/// Over-relaxed ADMM on  min sum w_t |r_t|  s.t.  r + X^T theta = y.
Estimate weighted_l1_first_order(const Dataset& data, const Vector& w, const SolverOptions& opts) {
  const Matrix& x = data.regressors;
  const Vector& y = data.outputs;
  const Index samples = data.samples();
  const Eigen::HouseholderQR<Matrix> qr(x.transpose());
  const Matrix q = qr.householderQ() * Matrix::Identity(samples, data.dim());
  const auto project_range = [&](const Vector& v) { return Vector(q * (q.transpose() * v)); };
  const auto solve_theta = [&](const Vector& target) { return Vector(qr.solve(target)); };

  constexpr double kRelax = 1.6;
  Vector theta = solve_theta(y);
  Vector r = y - x.transpose() * theta;
  std::vector<double> mags(static_cast<std::size_t>(samples));
  for (Index t = 0; t < samples; ++t) mags[static_cast<std::size_t>(t)] = std::abs(r(t));
  const double wbar = w.mean();
  double rho = wbar / (median(mags) + 1e-12 * (1.0 + y.cwiseAbs().maxCoeff()));
  Vector u = Vector::Zero(samples);
  const bool all_positive = (w.array() > 0.0).all();

  Estimate best = make_estimate(data, theta, w);
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    theta = solve_theta(y - r - u);
    const Vector fit = x.transpose() * theta;
    const Vector fit_hat = kRelax * fit + (1.0 - kRelax) * (y - r);
    const Vector r_old = r;
    r = soft_threshold(y - fit_hat - u, w / rho);
    u += fit_hat + r - y;

    const double primal_res = (fit + r - y).norm();
    const double dual_res = rho * (x * (r - r_old)).norm();
    if (iter % 10 == 9) {
      if (primal_res > 10.0 * dual_res) {
        rho *= 2.0;
        u /= 2.0;
      } else if (dual_res > 10.0 * primal_res) {
        rho /= 2.0;
        u *= 2.0;
      }
    }

    if (iter % 25 == 24 || iter + 1 == opts.max_iter) {
      const Estimate cur = make_estimate(data, theta, w);
      if (cur.objective < best.objective) best = cur;
      if (all_positive) {
        // Dual point: nu in null(X) with |nu_t| <= w_t gives the lower bound y^T nu.
        Vector nu = -rho * u;
        nu -= project_range(nu);
        double scale = 1.0;
        for (Index t = 0; t < samples; ++t) scale = std::max(scale, std::abs(nu(t)) / w(t));
        nu /= scale;
        const double lower = std::abs(y.dot(nu));
        if (best.objective - lower <= std::max(opts.opt_tol, 1e-7) * (1.0 + best.objective)) {
          ++iter;
          break;
        }
      }
    }
  }

  if (auto polished = interpolate_smallest(x, y, best.residuals, w)) {
    const Estimate cand = make_estimate(data, *polished, w);
    if (cand.objective <= best.objective * (1.0 + 1e-12) + 1e-14) best = cand;
  }
  best.iterations = iter;
  return best;
}

Estimate weighted_l1_exact(const Dataset& data, const Vector& w, const SolverOptions& opts) {
  const LadResult lad = minimize_weighted_l1(data.regressors, data.outputs, w, opts.max_iter);
  Estimate est = make_estimate(data, lad.theta, w);
  est.iterations = lad.iterations;
  est.status = lad.converged ? SolveStatus::optimal : SolveStatus::iteration_limit;
  return est;
}

}  // namespace

double l1_objective(const Dataset& data, const Vector& theta) {
  return (data.outputs - data.regressors.transpose() * theta).cwiseAbs().sum();
}

Estimate solve_l1(const Dataset& data, const SolverOptions& opts) {
  opts.validate();
  require_solvable(data);
  const Vector ones = Vector::Ones(data.samples());
  Estimate est = opts.method == L1Method::exact_lp ? weighted_l1_exact(data, ones, opts)
                                                   : weighted_l1_first_order(data, ones, opts);
  est.objective = est.residuals.cwiseAbs().sum();
  const S3Result cert = s3_value(data, est.theta);
  est.status = cert.value <= 1.0 + opts.opt_tol ? SolveStatus::optimal : SolveStatus::iteration_limit;
  return est;
}

Estimate solve_weighted_l1(const Dataset& data, const Vector& weights, const SolverOptions& opts) {
  opts.validate();
  require_solvable(data);
  if (weights.size() != data.samples())
    throw InvalidArgument("weights length " + std::to_string(weights.size()) +
                          " does not match N = " + std::to_string(data.samples()));
  if (!weights.allFinite() || (weights.array() < 0.0).any())
    throw InvalidArgument("weights must be finite and nonnegative");
  if (!(weights.array() > 0.0).any()) throw InvalidArgument("weights are all zero");
  {
    IndexSet active;
    for (Index t = 0; t < weights.size(); ++t) {
      if (weights(t) > 0.0) active.push_back(t);
    }
    if (!has_full_row_rank(select_columns(data.regressors, active)))
      throw NumericalError("regressors with positive weight are rank deficient");
  }
  if (opts.method == L1Method::exact_lp) return weighted_l1_exact(data, weights, opts);
  return weighted_l1_first_order(data, weights, opts);
}

double default_reweight_delta(const Dataset& data) {
  std::vector<double> mags(static_cast<std::size_t>(data.samples()));
  for (Index t = 0; t < data.samples(); ++t) mags[static_cast<std::size_t>(t)] = std::abs(data.outputs(t));
  return 1e-4 * (1.0 + median(std::move(mags)));
}

ReweightedResult solve_reweighted_l1(const Dataset& data, int r_max, double delta,
                                     const SolverOptions& opts) {
  if (r_max < 0) throw InvalidArgument("r_max must be nonnegative");
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  const Index samples = data.samples();

  ReweightedResult out;
  Vector w = Vector::Constant(samples, 1.0 / static_cast<double>(samples));
  // Uniform weights only rescale the objective, so the first iterate is plain l1.
  out.estimate = solve_l1(data, opts);
  out.iterates.push_back(out.estimate.theta);
  out.weights.push_back(w);
  for (int r = 1; r <= r_max; ++r) {
    Vector xi = (out.estimate.residuals.cwiseAbs().array() + delta).inverse().matrix();
    w = xi / xi.sum();
    const int total = out.estimate.iterations;
    out.estimate = solve_weighted_l1(data, w, opts);
    out.estimate.iterations += total;
    out.iterates.push_back(out.estimate.theta);
    out.weights.push_back(w);
  }
  if (r_max > 0) out.estimate.objective = out.estimate.residuals.cwiseAbs().sum();
  return out;
}

double regularized_objective(const Dataset& data, double lambda, const Vector& theta,
                             const Vector& phi) {
  const Vector r = data.outputs - data.regressors.transpose() * theta - phi;
  return 0.5 * r.squaredNorm() + lambda * phi.cwiseAbs().sum();
}

namespace {

/// Psi v = v - Q Q^T v with Q an orthonormal basis of range(X^T).
struct ResidualProjector {
  Eigen::HouseholderQR<Matrix> qr;
  Matrix q;

  explicit ResidualProjector(const Matrix& x)
      : qr(x.transpose()), q(qr.householderQ() * Matrix::Identity(x.cols(), x.rows())) {}

  Vector apply(const Vector& v) const { return v - q * (q.transpose() * v); }
  Vector theta(const Vector& target) const { return qr.solve(target); }
};

RegularizedSolution closed_form_impl(const Dataset& data, const ResidualProjector& proj,
                                     const Vector& psi_y, double lambda, const IndexSet& support,
                                     const Vector& support_signs) {
  const Index samples = data.samples();
  RegularizedSolution sol;
  sol.lambda = lambda;
  sol.support = support;
  sol.phi = Vector::Zero(samples);
  if (!support.empty()) {
    const auto k = static_cast<Index>(support.size());
    Matrix psi_ss(k, k);
    const Matrix qs = [&] {
      Matrix out(proj.q.cols(), k);
      for (Index j = 0; j < k; ++j) out.col(j) = proj.q.row(support[static_cast<std::size_t>(j)]).transpose();
      return out;
    }();
    psi_ss = Matrix::Identity(k, k) - qs.transpose() * qs;
    if (numerical_rank(psi_ss) < k)
      throw NumericalError("Psi restricted to the support is singular");
    const Vector rhs = select_entries(psi_y, support) - lambda * support_signs;
    const Vector phi_s = psi_ss.ldlt().solve(rhs);
    for (Index j = 0; j < k; ++j) sol.phi(support[static_cast<std::size_t>(j)]) = phi_s(j);
  }
  sol.theta = proj.theta(data.outputs - sol.phi);
  sol.signs = (psi_y - proj.apply(sol.phi)) / lambda;
  for (std::size_t j = 0; j < support.size(); ++j) sol.signs(support[j]) = support_signs(static_cast<Index>(j));
  sol.objective = regularized_objective(data, lambda, sol.theta, sol.phi);
  return sol;
}

bool closed_form_consistent(const RegularizedSolution& sol, const Vector& support_signs,
                            double tol) {
  for (std::size_t j = 0; j < sol.support.size(); ++j) {
    const double p = sol.phi(sol.support[j]);
    if (p == 0.0 || (p > 0.0) != (support_signs(static_cast<Index>(j)) > 0.0)) return false;
  }
  return sol.signs.cwiseAbs().maxCoeff() <= 1.0 + tol;
}

}  // namespace

RegularizedSolution regularized_closed_form(const Dataset& data, double lambda,
                                            const IndexSet& support, const Vector& signs) {
  require_solvable(data);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (static_cast<Index>(support.size()) != signs.size())
    throw InvalidArgument("one sign per support index is required");
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] < 0 || support[j] >= data.samples() || (j > 0 && support[j] <= support[j - 1]))
      throw InvalidArgument("support must be sorted, unique and in range");
  }
  const ResidualProjector proj(data.regressors);
  return closed_form_impl(data, proj, proj.apply(data.outputs), lambda, support, signs);
}

RegularizedSolution solve_regularized(const Dataset& data, double lambda,
                                      const SolverOptions& opts) {
  opts.validate();
  require_solvable(data);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  const Index samples = data.samples();
  const ResidualProjector proj(data.regressors);
  const Vector psi_y = proj.apply(data.outputs);
  const Vector thresh = Vector::Constant(samples, lambda);

  const auto try_polish = [&](const Vector& phi) -> std::optional<RegularizedSolution> {
    IndexSet support;
    for (Index t = 0; t < samples; ++t) {
      if (phi(t) != 0.0) support.push_back(t);
    }
    if (static_cast<Index>(support.size()) > samples - data.dim()) return std::nullopt;
    Vector s(static_cast<Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) s(static_cast<Index>(j)) = phi(support[j]) > 0.0 ? 1.0 : -1.0;
    try {
      RegularizedSolution sol = closed_form_impl(data, proj, psi_y, lambda, support, s);
      if (closed_form_consistent(sol, s, 1e-12)) return sol;
    } catch (const NumericalError&) {
    }
    return std::nullopt;
  };

  // FISTA on 1/2 ||Psi y - Psi phi||^2 + lambda ||phi||_1; the gradient is 1-Lipschitz.
  Vector phi = Vector::Zero(samples);
  Vector z = phi;
  double tk = 1.0;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const Vector grad = proj.apply(z) - psi_y;
    Vector next = soft_threshold(z - grad, thresh);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    z = next + ((tk - 1.0) / tn) * (next - phi);
    const double step = (next - phi).norm();
    phi = std::move(next);
    tk = tn;
    if (iter % 20 == 0 || step <= opts.opt_tol * (1.0 + phi.norm())) {
      if (auto sol = try_polish(phi)) {
        sol->iterations = iter + 1;
        return *sol;
      }
      if (step <= opts.opt_tol * (1.0 + phi.norm())) {
        ++iter;
        break;
      }
    }
  }

  RegularizedSolution sol;
  sol.lambda = lambda;
  sol.phi = phi;
  sol.theta = proj.theta(data.outputs - phi);
  sol.signs = ((psi_y - proj.apply(phi)) / lambda).cwiseMax(-1.0).cwiseMin(1.0);
  for (Index t = 0; t < samples; ++t) {
    if (phi(t) != 0.0) {
      sol.support.push_back(t);
      sol.signs(t) = phi(t) > 0.0 ? 1.0 : -1.0;
    }
  }
  sol.objective = regularized_objective(data, lambda, sol.theta, sol.phi);
  sol.iterations = iter;
  sol.status = check_regularized_kkt(data, lambda, sol, std::max(opts.opt_tol, 1e-9))
                   ? SolveStatus::optimal
                   : SolveStatus::iteration_limit;
  return sol;
}

Estimate least_squares_oracle(const Dataset& data, const IndexSet& inliers) {
  data.validate();
  for (Index t : inliers) {
    if (t < 0 || t >= data.samples()) throw InvalidArgument("inlier index out of range");
  }
  const Matrix xi = select_columns(data.regressors, inliers);
  if (!has_full_row_rank(xi)) throw NumericalError("inlier regressors are rank deficient");
  const Vector theta = xi.transpose().colPivHouseholderQr().solve(select_entries(data.outputs, inliers));
  Estimate est;
  est.theta = theta;
  est.residuals = data.outputs - data.regressors.transpose() * theta;
  est.objective = select_entries(est.residuals, inliers).squaredNorm();
  return est;
}

}  // namespace robl1
