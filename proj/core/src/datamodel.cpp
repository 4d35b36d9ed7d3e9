#include "robl1/datamodel.hpp"

#include "robl1/errors.hpp"
#include "robl1/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace robl1 {

namespace {

void check_truth_identity(const Matrix& lhs, const Matrix& rhs, const char* what) {
  const double scale = 1.0 + lhs.cwiseAbs().maxCoeff();
  if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument(std::string(what) + ": outputs do not match the recorded truth");
  }
}

Matrix gaussian_matrix(Index rows, Index cols, CounterRng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

/// k distinct indices from {0..n-1}, uniformly, via a partial Fisher-Yates shuffle.
IndexSet sample_without_replacement(Index n, Index k, CounterRng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  IndexSet out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

double gross_value(const GenSpec& spec, CounterRng& rng) {
  const double v = rng.normal(spec.outlier_mean, spec.outlier_std);
  return spec.sign_mode == SignMode::positive_only ? std::abs(v) : v;
}

Vector draw_gross(const GenSpec& spec, Index samples) {
  Vector f = Vector::Zero(samples);
  CounterRng where(spec.seed, "outlier_locations");
  CounterRng value(spec.seed, "outlier_values");
  for (Index t : sample_without_replacement(samples, spec.outlier_count(), where)) {
    f(t) = gross_value(spec, value);
  }
  return f;
}

double noise_std(const GenSpec& spec, const Vector& clean) {
  if (!spec.noise_snr_db) return 0.0;
  const double power = clean.squaredNorm() / static_cast<double>(std::max<Index>(clean.size(), 1));
  return std::sqrt(power / std::pow(10.0, *spec.noise_snr_db / 10.0));
}

Vector draw_noise(const GenSpec& spec, Index samples, double stddev) {
  Vector e = Vector::Zero(samples);
  if (stddev == 0.0) return e;
  CounterRng rng(spec.seed, "noise");
  for (Index t = 0; t < samples; ++t) e(t) = stddev * rng.normal();
  return e;
}

/// Simulates the ARX recursion with zero initial conditions. `disturbance` is added to
/// every sample from index `first` on; earlier samples are clean.
Vector simulate_arx(const ArxParams& p, const Matrix& u, const Vector& disturbance, Index first) {
  const Index total = u.cols();
  Vector y = Vector::Zero(total);
  for (Index t = 0; t < total; ++t) {
    double v = 0.0;
    for (int j = 1; j <= p.n_a; ++j) {
      if (t - j >= 0) v += p.a(j - 1) * y(t - j);
    }
    for (int k = 0; k <= p.n_b; ++k) {
      if (t - k < 0) continue;
      for (int c = 0; c < p.n_u; ++c) v += p.b(k * p.n_u + c) * u(c, t - k);
    }
    if (t >= first) v += disturbance(t - first);
    y(t) = v;
  }
  return y;
}

Dataset generate_static(const GenSpec& spec, bool affine) {
  CounterRng reg_rng(spec.seed, "regressors");
  CounterRng theta_rng(spec.seed, "theta");
  Matrix x(spec.n, spec.samples);
  if (affine) {
    if (spec.n < 1) throw InvalidArgument("affine_gaussian needs n >= 1 (intercept row included)");
    x.topRows(spec.n - 1) = gaussian_matrix(spec.n - 1, spec.samples, reg_rng);
    x.row(spec.n - 1).setOnes();
  } else {
    x = gaussian_matrix(spec.n, spec.samples, reg_rng);
  }
  Vector theta0(spec.n);
  for (Index i = 0; i < spec.n; ++i) theta0(i) = theta_rng.normal();

  const Vector clean = x.transpose() * theta0;
  Truth truth{theta0, draw_gross(spec, spec.samples),
              draw_noise(spec, spec.samples, noise_std(spec, clean))};
  Dataset d{std::move(x), clean + truth.gross + truth.noise, std::move(truth), {}};
  return d;
}

Dataset generate_arx(const GenSpec& spec) {
  const ArxParams& p = *spec.arx_params;
  const Index burn = std::max(p.n_a, p.n_b);
  const Index total = spec.samples + burn;
  CounterRng input_rng(spec.seed, "inputs");
  const Matrix u = gaussian_matrix(p.n_u, total, input_rng);

  const Vector zero = Vector::Zero(spec.samples);
  const Vector y_clean = simulate_arx(p, u, zero, burn);
  const double sigma = noise_std(spec, y_clean.tail(spec.samples));

  Vector gross = draw_gross(spec, spec.samples);
  Vector noise = draw_noise(spec, spec.samples, sigma);
  const Vector y = simulate_arx(p, u, gross + noise, burn);
  if (!y.allFinite()) throw NumericalError("ARX recursion produced non-finite outputs");

  Matrix x = build_regressor_matrix(y, u, p.n_a, p.n_b);
  Dataset d{std::move(x), y.tail(spec.samples),
            Truth{p.parameter_vector(), std::move(gross), std::move(noise)}, {}};
  return d;
}

Dataset generate_state_estimation(const GenSpec& spec) {
  const LtiParams& lti = *spec.lti_params;
  const Index k = lti.a.rows();
  CounterRng theta_rng(spec.seed, "theta");
  CounterRng input_rng(spec.seed, "inputs");
  Vector z0(k);
  for (Index i = 0; i < k; ++i) z0(i) = theta_rng.normal();
  const Matrix u = gaussian_matrix(lti.b.cols(), spec.samples, input_rng);

  Vector clean(spec.samples);
  Vector z = z0;
  for (Index t = 0; t < spec.samples; ++t) {
    clean(t) = lti.c.dot(z);
    z = lti.a * z + lti.b * u.col(t);
  }
  if (!clean.allFinite()) throw NumericalError("state recursion produced non-finite outputs");
  Vector gross = draw_gross(spec, spec.samples);
  Vector noise = draw_noise(spec, spec.samples, noise_std(spec, clean));
  Dataset d = build_state_estimation_problem(lti.a, lti.b, lti.c, u, clean + gross + noise);
  d.truth = Truth{z0, std::move(gross), std::move(noise)};
  return d;
}

}  // namespace

void Dataset::validate() const {
  if (regressors.rows() < 1 || regressors.cols() < 1)
    throw InvalidArgument("dataset needs n >= 1 and N >= 1");
  if (outputs.size() != regressors.cols())
    throw InvalidArgument("dataset: outputs length " + std::to_string(outputs.size()) +
                          " != number of regressor columns " +
                          std::to_string(regressors.cols()));
  if (truth) {
    if (truth->theta0.size() != dim() || truth->gross.size() != samples() ||
        truth->noise.size() != samples())
      throw InvalidArgument("dataset: truth record has inconsistent dimensions");
    const Vector rebuilt = regressors.transpose() * truth->theta0 + truth->gross + truth->noise;
    check_truth_identity(outputs, rebuilt, "dataset");
  }
  if (!labels.empty() && static_cast<Index>(labels.size()) != samples())
    throw InvalidArgument("dataset: one label per sample expected");
}

void MultiDataset::validate() const {
  if (regressors.rows() < 1 || regressors.cols() < 1 || outputs.rows() < 1)
    throw InvalidArgument("multi-dataset needs n, m, N >= 1");
  if (outputs.cols() != regressors.cols())
    throw InvalidArgument("multi-dataset: outputs and regressors disagree on N");
  if (truth) {
    if (truth->a0.rows() != outputs_dim() || truth->a0.cols() != dim() ||
        truth->gross.rows() != outputs_dim() || truth->gross.cols() != samples() ||
        truth->noise.rows() != outputs_dim() || truth->noise.cols() != samples())
      throw InvalidArgument("multi-dataset: truth record has inconsistent dimensions");
    check_truth_identity(outputs, truth->a0 * regressors + truth->gross + truth->noise,
                         "multi-dataset");
  }
}

Vector residuals(const Dataset& data, const Vector& theta) {
  if (theta.size() != data.dim())
    throw InvalidArgument("theta has length " + std::to_string(theta.size()) + ", expected " +
                          std::to_string(data.dim()));
  return data.outputs - data.regressors.transpose() * theta;
}

IndexPartition partition_indices(const Dataset& data, const Vector& theta, double tol) {
  if (!(tol >= 0.0)) throw InvalidArgument("partition tolerance must be nonnegative");
  if (!theta.allFinite()) throw InvalidArgument("theta must be finite");
  const Vector phi = residuals(data, theta);
  IndexPartition p;
  p.tol = tol;
  for (Index t = 0; t < data.samples(); ++t) {
    const double fit = -phi(t);  // x_t^T theta - y_t
    if (std::abs(fit) <= tol * (1.0 + std::abs(data.outputs(t)))) {
      p.zero.push_back(t);
    } else if (fit > 0.0) {
      p.plus.push_back(t);
    } else {
      p.minus.push_back(t);
    }
  }
  return p;
}

Vector ArxParams::parameter_vector() const {
  Vector theta(regressor_dim());
  theta << a, b;
  return theta;
}

Index GenSpec::outlier_count() const {
  return static_cast<Index>(std::lround(outlier_fraction * static_cast<double>(samples)));
}

void GenSpec::validate() const {
  if (samples < 1) throw InvalidArgument("GenSpec: N must be >= 1");
  if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0))
    throw InvalidArgument("GenSpec: outlier_fraction must lie in [0, 1]");
  if (outlier_fraction > 0.0 && !(outlier_std > 0.0))
    throw InvalidArgument("GenSpec: outlier_std must be positive when outliers are requested");
  if (!std::isfinite(outlier_mean)) throw InvalidArgument("GenSpec: outlier_mean must be finite");
  if (noise_snr_db && !std::isfinite(*noise_snr_db))
    throw InvalidArgument("GenSpec: noise_snr_db must be finite");
  switch (regressor_kind) {
    case RegressorKind::gaussian:
    case RegressorKind::affine_gaussian:
      if (n < 1) throw InvalidArgument("GenSpec: n must be >= 1");
      break;
    case RegressorKind::arx: {
      if (!arx_params) throw InvalidArgument("GenSpec: arx kind requires arx_params");
      const ArxParams& p = *arx_params;
      if (p.n_a < 0 || p.n_b < 0 || p.n_u < 1) throw InvalidArgument("GenSpec: bad ARX orders");
      if (p.a.size() != p.n_a || p.b.size() != (p.n_b + 1) * p.n_u)
        throw InvalidArgument("GenSpec: ARX coefficient vectors do not match the orders");
      if (n != p.regressor_dim())
        throw InvalidArgument("GenSpec: n must equal n_a + (n_b + 1) * n_u = " +
                              std::to_string(p.regressor_dim()));
      break;
    }
    case RegressorKind::state_estimation: {
      if (!lti_params) throw InvalidArgument("GenSpec: state_estimation kind requires lti_params");
      const LtiParams& l = *lti_params;
      if (l.a.rows() != l.a.cols() || l.b.rows() != l.a.rows() || l.c.size() != l.a.rows() ||
          l.b.cols() < 1)
        throw InvalidArgument("GenSpec: inconsistent (A, B, C) dimensions");
      if (n != l.a.rows()) throw InvalidArgument("GenSpec: n must equal the state dimension");
      break;
    }
  }
}

Dataset generate(const GenSpec& spec) {
  spec.validate();
  switch (spec.regressor_kind) {
    case RegressorKind::gaussian:
      return generate_static(spec, false);
    case RegressorKind::affine_gaussian:
      return generate_static(spec, true);
    case RegressorKind::arx:
      return generate_arx(spec);
    case RegressorKind::state_estimation:
      return generate_state_estimation(spec);
  }
  throw InvalidArgument("GenSpec: unknown regressor kind");
}

Matrix build_regressor_matrix(const Vector& outputs, const Matrix& inputs, int n_a, int n_b) {
  if (n_a < 0 || n_b < 0) throw InvalidArgument("lags must be nonnegative");
  if (inputs.cols() != outputs.size())
    throw InvalidArgument("input series has " + std::to_string(inputs.cols()) +
                          " samples but output series has " + std::to_string(outputs.size()));
  if (inputs.rows() < 1) throw InvalidArgument("inconsistent channel count: n_u must be >= 1");
  const Index n_u = inputs.rows();
  const Index start = std::max(n_a, n_b);
  const Index total = outputs.size();
  if (total <= start)
    throw InvalidArgument("insufficient history: need more than " + std::to_string(start) +
                          " samples");
  const Index dim = n_a + (n_b + 1) * n_u;
  Matrix x(dim, total - start);
  for (Index t = start; t < total; ++t) {
    const Index col = t - start;
    for (int j = 1; j <= n_a; ++j) x(j - 1, col) = outputs(t - j);
    for (int k = 0; k <= n_b; ++k) x.block(n_a + k * n_u, col, n_u, 1) = inputs.col(t - k);
  }
  return x;
}

Vector sensor_fault_to_equation_error(const Vector& fault, const Vector& theta0, int n_a) {
  if (n_a < 0 || n_a > theta0.size())
    throw InvalidArgument("n_a = " + std::to_string(n_a) + " exceeds the parameter length " +
                          std::to_string(theta0.size()));
  Vector f = fault;
  for (Index t = 0; t < fault.size(); ++t) {
    for (int j = 1; j <= n_a && t - j >= 0; ++j) f(t) -= theta0(j - 1) * fault(t - j);
  }
  return f;
}

Dataset build_state_estimation_problem(const Matrix& a, const Matrix& b, const Vector& c,
                                       const Matrix& inputs, const Vector& observed) {
  const Index k = a.rows();
  if (a.cols() != k || b.rows() != k || c.size() != k)
    throw InvalidArgument("state estimation: (A, B, C) dimensions are inconsistent");
  if (inputs.rows() != b.cols() || inputs.cols() < observed.size())
    throw InvalidArgument("state estimation: input series does not match B or the horizon");
  const Index horizon = observed.size();
  if (horizon < 1) throw InvalidArgument("state estimation: empty horizon");

  Dataset d;
  d.regressors.resize(k, horizon);
  d.outputs.resize(horizon);
  // obs_row = C^T A^t; forced = C^T Delta_t u-bar_t = C^T z_t for z_0 = 0.
  Eigen::RowVectorXd obs_row = c.transpose();
  Vector forced_state = Vector::Zero(k);
  for (Index t = 0; t < horizon; ++t) {
    d.regressors.col(t) = obs_row.transpose();
    d.outputs(t) = observed(t) - c.dot(forced_state);
    obs_row = obs_row * a;
    forced_state = a * forced_state + b * inputs.col(t);
  }
  return d;
}

ArxParams sample_stable_arx(int n_a, int n_b, std::uint64_t seed, double max_radius) {
  CounterRng rng(seed, "arx_system");
  ArxParams p;
  p.n_a = n_a;
  p.n_b = n_b;
  p.n_u = 1;
  p.a = Vector::Zero(n_a);
  p.b.resize(n_b + 1);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (int j = 0; j < n_a; ++j) p.a(j) = 2.0 * rng.uniform() - 1.0;
    if (n_a == 0) break;
    Matrix companion = Matrix::Zero(n_a, n_a);
    companion.row(0) = p.a.transpose();
    if (n_a > 1) companion.bottomLeftCorner(n_a - 1, n_a - 1).setIdentity();
    const double radius = Eigen::EigenSolver<Matrix>(companion, false).eigenvalues().cwiseAbs().maxCoeff();
    if (radius < max_radius) break;
    if (attempt == 9999) throw NumericalError("could not sample a stable ARX system");
  }
  for (int k = 0; k <= n_b; ++k) p.b(k) = rng.normal();
  return p;
}

MultiDataset generate_multi(Index m, const GenSpec& spec) {
  if (m < 1) throw InvalidArgument("generate_multi: m must be >= 1");
  if (spec.regressor_kind != RegressorKind::gaussian &&
      spec.regressor_kind != RegressorKind::affine_gaussian)
    throw InvalidArgument("generate_multi supports gaussian and affine_gaussian regressors");
  spec.validate();
  CounterRng reg_rng(spec.seed, "regressors");
  CounterRng theta_rng(spec.seed, "theta");
  Matrix x(spec.n, spec.samples);
  if (spec.regressor_kind == RegressorKind::affine_gaussian) {
    if (spec.n < 1) throw InvalidArgument("affine_gaussian needs n >= 1");
    x.topRows(spec.n - 1) = gaussian_matrix(spec.n - 1, spec.samples, reg_rng);
    x.row(spec.n - 1).setOnes();
  } else {
    x = gaussian_matrix(spec.n, spec.samples, reg_rng);
  }
  // Column-major fill so that m = 1 consumes the stream exactly like the scalar generator.
  Matrix a0(m, spec.n);
  for (Index j = 0; j < spec.n; ++j)
    for (Index i = 0; i < m; ++i) a0(i, j) = theta_rng.normal();

  const Matrix clean = a0 * x;
  Matrix gross = Matrix::Zero(m, spec.samples);
  CounterRng where(spec.seed, "outlier_locations");
  CounterRng value(spec.seed, "outlier_values");
  for (Index t : sample_without_replacement(spec.samples, spec.outlier_count(), where)) {
    for (Index i = 0; i < m; ++i) gross(i, t) = gross_value(spec, value);
  }
  Matrix noise = Matrix::Zero(m, spec.samples);
  if (spec.noise_snr_db) {
    const double power = clean.squaredNorm() / static_cast<double>(clean.size());
    const double sigma = std::sqrt(power / std::pow(10.0, *spec.noise_snr_db / 10.0));
    CounterRng rng(spec.seed, "noise");
    for (Index t = 0; t < spec.samples; ++t)
      for (Index i = 0; i < m; ++i) noise(i, t) = sigma * rng.normal();
  }
  MultiDataset d{x, clean + gross + noise, MultiTruth{a0, gross, noise}};
  return d;
}

}  // namespace robl1
