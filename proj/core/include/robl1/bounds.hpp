#pragma once

#include "robl1/datamodel.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace robl1 {

enum class Exactness { exact, sampled_lower_bound, not_computed };

/// Enumeration limits. Counts are numbers of subsets, sizes are sample counts N.
struct EnumerationCaps {
  /// nu_n enumerates the C(N, n-1) hyperplane-spanning subsets.
  std::uint64_t nu_subsets = 5'000'000;
  Index k_samples = 15;   // v1, k1, K1, K2
  Index l0_samples = 20;  // l0 brute force
  /// Random subsets drawn when a cap is exceeded in sampled mode.
  int sample_trials = 2000;
  std::uint64_t seed = 0;
};

struct GenericityResult {
  Index nu_n = 0;
  Exactness exactness = Exactness::exact;
};

/// Exact nu_n(X) when C(N, n-1) <= caps.nu_subsets; otherwise CapExceeded unless
/// `allow_sampling`, which returns a lower bound flagged sampled_lower_bound.
GenericityResult genericity_index(const Matrix& x, const EnumerationCaps& caps = {},
                                  bool allow_sampling = false);

/// max |P_kt| with P = X^T (X X^T)^{-1} X.
double r_value(const Matrix& x);
/// r of the columns rescaled to unit Sigma_X^{-1} norm, x_t / sqrt(x_t^T (X X^T)^{-1} x_t).
double rn_value(const Matrix& x);
/// 1/2 (1 + 1/mu) with mu the mutual coherence of the columns of I - P.
double coherence_bound(const Matrix& x);
/// N - 1/(2 r(X)).
double sufficient_threshold_r(const Matrix& x);

/// max over |I| = k of ||X_I^T (X_I X_I^T)^{-1} X_{I^c}||_inf; +inf when some X_I is
/// rank deficient. Exhaustive; N <= caps.k_samples.
double v1_value(const Matrix& x, Index k, const EnumerationCaps& caps = {});
/// max over |I| = k of ||X_{I^c}^T (X X^T)^{-1} X||_1. Exact for every N: for each column
/// the worst I^c holds the N - k largest magnitudes.
double v2_value(const Matrix& x, Index k);
/// min{k >= nu_n : v1(k) <= 1}.
Index k1_value(const Matrix& x, const EnumerationCaps& caps = {});
/// min{k : v2(k) <= 1/2}.
Index k2_value(const Matrix& x);

struct ErrorBoundConstants {
  double k1 = 0.0;
  double k2 = 0.0;
  /// Maximizer of K1.
  IndexSet j_set;
  Exactness exactness = Exactness::exact;
};

/// K1, K2 over all J with |J| >= nu_n(X). Exhaustive for N <= caps.k_samples; otherwise
/// CapExceeded unless `allow_sampling` (lower bounds over random subsets).
ErrorBoundConstants error_bound_constants(const Matrix& x, const EnumerationCaps& caps = {},
                                          bool allow_sampling = false);

/// (K1 eps + lambda K2) + K1 M sqrt(|J cap outliers| / |J|).
double evaluate_error_bound(double k1, double k2, const IndexSet& j_set, double eps, double m,
                            double lambda, const IndexSet& outlier_set);

struct L0Result {
  std::vector<Vector> minimizers;
  Index objective = 0;  // number of nonzero residuals
};

/// Exhaustive over interpolating n-subsets; N <= caps.l0_samples.
L0Result l0_brute_force(const Dataset& data, const EnumerationCaps& caps = {});

struct BoundsReport {
  GenericityResult nu;
  double r = 0.0;
  double r_n = 0.0;
  std::optional<double> coherence_bound;
  double threshold_r = 0.0;
  std::optional<Index> k1;
  std::optional<Index> k2;
  Exactness k1_exactness = Exactness::not_computed;
  Exactness k2_exactness = Exactness::not_computed;
};

/// Everything above for one regressor matrix. Quantities whose exhaustive evaluation
/// exceeds the caps are left absent and flagged not_computed; nu_n falls back to a sampled
/// lower bound.
BoundsReport compute_bounds(const Matrix& x, const EnumerationCaps& caps = {});

/// Rescales every column to unit 2-norm (zero columns untouched).
Matrix normalize_columns(const Matrix& x);

const char* to_string(Exactness e);

/// C(n, k) saturating at UINT64_MAX.
std::uint64_t binomial(Index n, Index k);

/// Calls f(indices) for every sorted k-subset of {0..n-1}; stops early when f returns false.
template <class F>
void for_each_subset(Index n, Index k, F&& f) {
  if (k < 0 || k > n) return;
  IndexSet idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    if (!f(static_cast<const IndexSet&>(idx))) return;
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace robl1
