#include "robl1/bounds.hpp"

#include "robl1/errors.hpp"
#include "robl1/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace robl1 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// v1 and v2 hit their thresholds exactly on structured data (e.g. integer X); rounding must not
// push such ties over.
constexpr double kTieTol = 1e-12;

void require_full_rank(const Matrix& x) {
  if (x.rows() < 1 || x.cols() < 1) throw InvalidArgument("empty regressor matrix");
  if (!all_finite(x)) throw InvalidArgument("non-finite regressor matrix");
  if (!has_full_row_rank(x)) throw NumericalError("regressor matrix X is rank deficient (rank < n)");
}

void require_k_cap(const Matrix& x, const EnumerationCaps& caps, const char* what) {
  if (x.cols() > caps.k_samples)
    throw CapExceeded(std::string(what) + ": N = " + std::to_string(x.cols()) +
                      " exceeds the exact enumeration cap " + std::to_string(caps.k_samples));
}

/// Uniform random k-subset, sorted.
IndexSet random_subset(CounterRng& rng, Index n, Index k) {
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

/// Number of columns of x lying in span(x_S) for an (n-1)-subset S; -1 when x_S is rank
/// deficient (such a subset never attains the maximum).
Index hyperplane_count(const Matrix& x, const IndexSet& s, const Vector& col_norms) {
  const Index n = x.rows();
  Vector normal;
  if (n == 1) {
    normal = Vector::Ones(1);
  } else {
    const Matrix xs = select_columns(x, s);
    const Eigen::JacobiSVD<Matrix> svd(xs, Eigen::ComputeFullU);
    const Vector& sv = svd.singularValues();
    if (sv.size() < n - 1 || sv(n - 2) < kRankRatio * sv(0)) return -1;
    normal = svd.matrixU().col(n - 1);
  }
  Index count = 0;
  for (Index t = 0; t < x.cols(); ++t) {
    if (std::abs(normal.dot(x.col(t))) <= 1e-9 * col_norms(t)) ++count;
  }
  return count;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix g = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

}  // namespace

__extension__ typedef unsigned __int128 Wide;

std::uint64_t binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  Wide acc = 1;
  for (Index i = 1; i <= k; ++i) {
    acc = acc * static_cast<Wide>(n - k + i) / static_cast<Wide>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc);
}

GenericityResult genericity_index(const Matrix& x, const EnumerationCaps& caps,
                                  bool allow_sampling) {
  require_full_rank(x);
  const Index n = x.rows();
  const Index samples = x.cols();
  const Vector col_norms = x.colwise().norm().transpose();

  // A rank-deficient subset lies in a hyperplane; the largest one is the set of columns in
  // a hyperplane spanned by n - 1 columns, and nu_n is one more than its size.
  Index largest = 0;
  GenericityResult out;
  const std::uint64_t total = binomial(samples, n - 1);
  if (total <= caps.nu_subsets) {
    for_each_subset(samples, n - 1, [&](const IndexSet& s) {
      largest = std::max(largest, hyperplane_count(x, s, col_norms));
      return true;
    });
    out.exactness = Exactness::exact;
  } else {
    if (!allow_sampling)
      throw CapExceeded("genericity index: C(" + std::to_string(samples) + ", " +
                        std::to_string(n - 1) + ") subsets exceed the cap " +
                        std::to_string(caps.nu_subsets));
    CounterRng rng(caps.seed, "genericity_sampling");
    for (int trial = 0; trial < caps.sample_trials; ++trial) {
      largest = std::max(largest, hyperplane_count(x, random_subset(rng, samples, n - 1), col_norms));
    }
    largest = std::max(largest, n - 1);
    out.exactness = Exactness::sampled_lower_bound;
  }
  out.nu_n = largest + 1;
  return out;
}

double r_value(const Matrix& x) {
  require_full_rank(x);
  return hat_matrix(x).cwiseAbs().maxCoeff();
}

double rn_value(const Matrix& x) {
  require_full_rank(x);
  const Matrix p = hat_matrix(x);
  Matrix scaled = x;
  for (Index t = 0; t < x.cols(); ++t) {
    if (p(t, t) > 0.0) scaled.col(t) /= std::sqrt(p(t, t));
  }
  return hat_matrix(scaled).cwiseAbs().maxCoeff();
}

double coherence_bound(const Matrix& x) {
  require_full_rank(x);
  if (x.cols() <= x.rows()) throw NumericalError("coherence bound needs N > n (I - P is zero)");
  const Matrix psi = residual_projector(x);
  const Vector norms = psi.colwise().norm().transpose();
  for (Index t = 0; t < norms.size(); ++t) {
    if (norms(t) <= 1e-12) throw NumericalError("coherence undefined: column " + std::to_string(t) + " of I - P is zero");
  }
  const Matrix gram = psi.transpose() * psi;
  double mu = 0.0;
  for (Index i = 0; i < gram.rows(); ++i) {
    for (Index j = i + 1; j < gram.cols(); ++j) mu = std::max(mu, std::abs(gram(i, j)) / (norms(i) * norms(j)));
  }
  mu = std::min(mu, 1.0);
  return mu > 0.0 ? 0.5 * (1.0 + 1.0 / mu) : kInf;
}

double sufficient_threshold_r(const Matrix& x) {
  return static_cast<double>(x.cols()) - 1.0 / (2.0 * r_value(x));
}

double v1_value(const Matrix& x, Index k, const EnumerationCaps& caps) {
  require_full_rank(x);
  require_k_cap(x, caps, "v1");
  const Index samples = x.cols();
  if (k < 0 || k > samples) throw InvalidArgument("v1: k out of range");
  if (k == samples) return 0.0;
  double worst = 0.0;
  for_each_subset(samples, k, [&](const IndexSet& in) {
    const Matrix xi = select_columns(x, in);
    if (numerical_rank(xi) < x.rows()) {
      worst = kInf;
      return false;
    }
    const Matrix xc = select_columns(x, complement(in, samples));
    const Matrix m = xi.transpose() * (xi * xi.transpose()).ldlt().solve(xc);
    worst = std::max(worst, m.cwiseAbs().rowwise().sum().maxCoeff());
    return true;
  });
  return worst;
}

namespace {

/// largest[j] = max over columns t of the sum of the j largest |P_it|, so v2(k) = largest[N - k].
std::vector<double> largest_column_sums(const Matrix& x) {
  const Index samples = x.cols();
  const Matrix p = hat_matrix(x).cwiseAbs();
  std::vector<double> largest(static_cast<std::size_t>(samples + 1), 0.0);
  std::vector<double> col(static_cast<std::size_t>(samples));
  for (Index t = 0; t < samples; ++t) {
    for (Index i = 0; i < samples; ++i) col[static_cast<std::size_t>(i)] = p(i, t);
    std::sort(col.begin(), col.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t j = 0; j < col.size(); ++j) {
      sum += col[j];
      largest[j + 1] = std::max(largest[j + 1], sum);
    }
  }
  return largest;
}

}  // namespace

double v2_value(const Matrix& x, Index k) {
  require_full_rank(x);
  const Index samples = x.cols();
  if (k < 0 || k > samples) throw InvalidArgument("v2: k out of range");
  return largest_column_sums(x)[static_cast<std::size_t>(samples - k)];
}

Index k1_value(const Matrix& x, const EnumerationCaps& caps) {
  require_full_rank(x);
  require_k_cap(x, caps, "k1");
  const Index nu = genericity_index(x, caps).nu_n;
  for (Index k = nu; k < x.cols(); ++k) {
    if (v1_value(x, k, caps) <= 1.0 + kTieTol) return k;
  }
  return x.cols();
}

Index k2_value(const Matrix& x) {
  require_full_rank(x);
  const std::vector<double> largest = largest_column_sums(x);
  for (Index k = 1; k < x.cols(); ++k) {
    if (largest[static_cast<std::size_t>(x.cols() - k)] <= 0.5 + kTieTol) return k;
  }
  return x.cols();
}

ErrorBoundConstants error_bound_constants(const Matrix& x, const EnumerationCaps& caps,
                                          bool allow_sampling) {
  require_full_rank(x);
  const Index n = x.rows();
  const Index samples = x.cols();
  const Eigen::LDLT<Matrix> full((x * x.transpose()).eval());
  const Matrix id = Matrix::Identity(n, n);

  ErrorBoundConstants out;
  out.k1 = -1.0;
  const auto visit = [&](const IndexSet& j) {
    const Matrix xj = select_columns(x, j);
    const Matrix gj = xj * xj.transpose();
    const Eigen::LDLT<Matrix> ldlt(gj);
    if (numerical_rank(xj) < n) return;
    const Matrix xc = select_columns(x, complement(j, samples));
    const Matrix gc = xc * xc.transpose();
    const Matrix e = ldlt.solve(gc.transpose()).transpose();  // G_c G_j^{-1}
    const Matrix e2 = e * e;
    const Matrix poly = id + e + 2.0 * e2 + e2 * e;
    const double root = std::sqrt(static_cast<double>(j.size()));
    const double c1 = root * spectral_norm(full.solve(poly * xj));
    const double c2 = root * spectral_norm(ldlt.solve(xj));
    if (c1 > out.k1) {
      out.k1 = c1;
      out.j_set = j;
    }
    out.k2 = std::max(out.k2, c2);
  };

  if (samples <= caps.k_samples) {
    const Index nu = genericity_index(x, caps).nu_n;
    for (Index size = nu; size <= samples; ++size) {
      for_each_subset(samples, size, [&](const IndexSet& j) {
        visit(j);
        return true;
      });
    }
    out.exactness = Exactness::exact;
  } else {
    if (!allow_sampling) require_k_cap(x, caps, "K1/K2");
    const Index nu = genericity_index(x, caps, true).nu_n;
    CounterRng rng(caps.seed, "error_bound_sampling");
    IndexSet all(static_cast<std::size_t>(samples));
    std::iota(all.begin(), all.end(), Index{0});
    visit(all);
    for (int trial = 0; trial < caps.sample_trials; ++trial) {
      const Index size = nu + static_cast<Index>(rng.below(static_cast<std::uint64_t>(samples - nu + 1)));
      visit(random_subset(rng, samples, size));
    }
    out.exactness = Exactness::sampled_lower_bound;
  }
  return out;
}

double evaluate_error_bound(double k1, double k2, const IndexSet& j_set, double eps, double m,
                            double lambda, const IndexSet& outlier_set) {
  if (j_set.empty()) throw InvalidArgument("error bound: empty J");
  if (eps < 0.0 || m < 0.0 || lambda < 0.0) throw InvalidArgument("error bound: negative input");
  IndexSet a = j_set;
  IndexSet b = outlier_set;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  IndexSet common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  const double ratio = static_cast<double>(common.size()) / static_cast<double>(a.size());
  return (k1 * eps + lambda * k2) + k1 * m * std::sqrt(ratio);
}

L0Result l0_brute_force(const Dataset& data, const EnumerationCaps& caps) {
  data.validate();
  const Index n = data.dim();
  const Index samples = data.samples();
  if (samples > caps.l0_samples)
    throw CapExceeded("l0 brute force: N = " + std::to_string(samples) + " exceeds the cap " +
                      std::to_string(caps.l0_samples));
  const Matrix& x = data.regressors;
  const Vector& y = data.outputs;

  L0Result out;
  out.objective = samples + 1;
  for_each_subset(samples, n, [&](const IndexSet& s) {
    const Matrix xs = select_columns(x, s);
    if (numerical_rank(xs) < n) return true;
    const Vector theta = xs.transpose().partialPivLu().solve(select_entries(y, s));
    const Vector r = y - x.transpose() * theta;
    Index nonzero = 0;
    for (Index t = 0; t < samples; ++t) {
      if (std::abs(r(t)) > 1e-9 * (1.0 + std::abs(y(t)))) ++nonzero;
    }
    if (nonzero < out.objective) {
      out.objective = nonzero;
      out.minimizers.clear();
    }
    if (nonzero == out.objective) {
      const bool seen = std::any_of(out.minimizers.begin(), out.minimizers.end(), [&](const Vector& v) {
        return (v - theta).norm() <= 1e-8 * (1.0 + theta.norm());
      });
      if (!seen) out.minimizers.push_back(theta);
    }
    return true;
  });
  if (out.minimizers.empty()) throw NumericalError("l0 brute force: X is rank deficient");
  return out;
}

Matrix normalize_columns(const Matrix& x) {
  Matrix out = x;
  for (Index t = 0; t < x.cols(); ++t) {
    const double nrm = x.col(t).norm();
    if (nrm > 0.0) out.col(t) /= nrm;
  }
  return out;
}

BoundsReport compute_bounds(const Matrix& x, const EnumerationCaps& caps) {
  require_full_rank(x);
  BoundsReport rep;
  rep.nu = genericity_index(x, caps, true);
  rep.r = r_value(x);
  rep.r_n = rn_value(x);
  try {
    rep.coherence_bound = coherence_bound(x);
  } catch (const NumericalError&) {
    rep.coherence_bound.reset();
  }
  rep.threshold_r = sufficient_threshold_r(x);
  if (x.cols() <= caps.k_samples && rep.nu.exactness == Exactness::exact) {
    rep.k1 = k1_value(x, caps);
    rep.k1_exactness = Exactness::exact;
    rep.k2 = k2_value(x);
    rep.k2_exactness = Exactness::exact;
  }
  return rep;
}

const char* to_string(Exactness e) {
  switch (e) {
    case Exactness::exact:
      return "exact";
    case Exactness::sampled_lower_bound:
      return "sampled_lower_bound";
    case Exactness::not_computed:
      return "not_computed";
  }
  return "not_computed";
}

}  // namespace robl1
