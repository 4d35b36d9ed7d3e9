#pragma once

#include "robl1/robl1.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace acceptance {

using namespace robl1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

inline Dataset make_dataset(const Matrix& x, const Vector& y) {
  Dataset d;
  d.regressors = x;
  d.outputs = y;
  return d;
}

inline double sample_median(Vector v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::nth_element(s.begin(), s.begin() + static_cast<long>(s.size() / 2), s.end());
  return s[s.size() / 2];
}

inline Outcome median_equivalence(int instances, std::uint64_t seed) {
  testing_support::Draw draw(seed);
  double worst = 0.0;
  int bad = 0;
  for (int k = 0; k < instances; ++k) {
    const long n_samples = 2 * draw.integer(0, 100) + 1;
    Vector y(n_samples);
    for (long t = 0; t < n_samples; ++t)
      y(t) = draw.coin(0.3) ? draw.uniform(-1e3, 1e3) : draw.normal();
    const Estimate est = solve_l1(make_dataset(Matrix::Ones(1, n_samples), y));
    const double err = std::abs(est.theta(0) - sample_median(y));
    worst = std::max(worst, err);
    if (err > 1e-9) ++bad;
  }
  return {bad == 0, std::to_string(instances - bad) + "/" + std::to_string(instances) +
                        " medians matched, worst error " + fmt(worst)};
}

/// Random instance mixing clean and corrupted draws; roughly half carry outliers.
inline Dataset random_instance(testing_support::Draw& draw) {
  GenSpec s;
  s.n = draw.integer(1, 5);
  s.samples = draw.integer(s.n + 2, 60);
  s.regressor_kind = draw.coin(0.5) ? RegressorKind::gaussian : RegressorKind::affine_gaussian;
  if (s.regressor_kind == RegressorKind::affine_gaussian && s.n < 2) s.n = 2;
  s.outlier_fraction = draw.coin(0.5) ? draw.uniform(0.05, 0.6) : 0.0;
  if (draw.coin(0.3)) s.noise_snr_db = 20.0;
  s.seed = static_cast<std::uint64_t>(draw.integer(0, 1L << 40));
  return generate(s);
}

inline Outcome certificate_soundness(int instances, std::uint64_t seed) {
  testing_support::Draw draw(seed);
  int uncertified = 0, perturbed_wrong = 0;
  for (int k = 0; k < instances; ++k) {
    const Dataset data = random_instance(draw);
    const Estimate est = solve_l1(data);
    if (!check_optimal(data, est.theta, 1e-8).optimal) ++uncertified;

    const double scale = std::pow(10.0, draw.uniform(-4.0, 0.0));
    Vector eta = draw.vector(data.dim());
    eta *= scale / eta.norm();
    const Vector moved = est.theta + eta;
    const bool verdict = check_optimal(data, moved, 1e-8).optimal;
    const bool worse = l1_objective(data, moved) > l1_objective(data, est.theta) + 1e-8;
    if (verdict || !worse) ++perturbed_wrong;
  }
  return {uncertified == 0 && perturbed_wrong == 0,
          std::to_string(instances - uncertified) + "/" + std::to_string(instances) +
              " solver outputs certified, " + std::to_string(instances - perturbed_wrong) + "/" +
              std::to_string(instances) + " perturbations rejected and confirmed worse"};
}

struct PlantedInstance {
  Dataset data;
  Vector theta0;
  long outliers = 0;
};

/// Gaussian X with as many gross errors as the r(X) condition allows (sometimes fewer).
inline PlantedInstance planted_l0_instance(testing_support::Draw& draw) {
  PlantedInstance p;
  const long n = draw.integer(1, 3);
  const long big_n = draw.integer(std::max<long>(n + 2, 5), 12);
  Matrix x = draw.matrix(n, big_n);
  if (n == 1 && draw.coin(0.5)) x.setOnes();
  const double r = oracle::r_value(x);
  const long allowed = static_cast<long>(std::ceil(0.5 / r)) - 1;
  p.outliers = std::max<long>(0, draw.coin(0.7) ? allowed : draw.integer(0, std::max<long>(0, allowed)));
  p.theta0 = draw.vector(n);
  Vector y = x.transpose() * p.theta0;
  std::vector<long> idx(static_cast<std::size_t>(big_n));
  for (long i = 0; i < big_n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), draw.engine());
  for (long i = 0; i < p.outliers; ++i)
    y(idx[static_cast<std::size_t>(i)]) += (draw.coin(0.5) ? 1.0 : -1.0) * draw.uniform(5.0, 100.0);
  p.data = make_dataset(x, y);
  return p;
}

inline Outcome l0_l1_equivalence(int instances, std::uint64_t seed) {
  testing_support::Draw draw(seed);
  int ok = 0, skipped = 0;
  for (int k = 0; k < instances; ++k) {
    PlantedInstance p = planted_l0_instance(draw);
    const long inliers = p.data.samples() - p.outliers;
    if (!(static_cast<double>(inliers) > p.data.samples() - 0.5 / oracle::r_value(p.data.regressors))) {
      ++skipped;
      continue;
    }
    const L0Result l0 = l0_brute_force(p.data);
    const bool l0_ok = l0.minimizers.size() == 1 && (l0.minimizers[0] - p.theta0).norm() <= 1e-6;
    const bool l1_ok = (solve_l1(p.data).theta - p.theta0).norm() <= 1e-5;
    if (l0_ok && l1_ok) ++ok;
  }
  return {ok == instances, std::to_string(ok) + "/" + std::to_string(instances) +
                               " instances with unique l0 minimizer and l1 recovery" +
                               (skipped ? ", " + std::to_string(skipped) + " violated the premise" : "")};
}

inline Matrix lemma_matrix(testing_support::Draw& draw) {
  while (true) {
    const long n = draw.integer(1, 4);
    const long big_n = draw.integer(n, 15);
    Matrix x = draw.matrix(n, big_n);
    if (draw.coin(0.4)) {
      for (long j = 0; j < big_n; ++j)
        for (long i = 0; i < n; ++i) x(i, j) = static_cast<double>(draw.integer(-1, 1));
    }
    if (draw.coin(0.2) && big_n > n + 1) x.col(big_n - 1) = x.col(0);
    if (oracle::rank(x) == n) return x;
  }
}

inline Outcome lemma_inequalities(int instances, std::uint64_t seed) {
  testing_support::Draw draw(seed);
  int first = 0, second = 0, second_integer = 0;
  for (int k = 0; k < instances; ++k) {
    const Matrix x = lemma_matrix(draw);
    const double big_n = static_cast<double>(x.cols());
    const double r = r_value(x);
    const GenericityResult g = genericity_index(x);
    if (g.exactness != Exactness::exact) return {false, "genericity index was not exact"};
    if (1.0 / r > big_n - static_cast<double>(g.nu_n) + 1.0 + 1e-9) ++first;
    const double k2 = static_cast<double>(k2_value(x));
    if (big_n - 0.5 / r < k2 - 1e-9) ++second;
    if (std::ceil(big_n - 0.5 / r - 1e-9) < k2) ++second_integer;
  }
  return {first == 0 && second == 0,
          "violations: 1/r bound " + std::to_string(first) + ", k2 bound " + std::to_string(second) +
              " (" + std::to_string(second_integer) + " with N - 1/(2r) rounded up) over " +
              std::to_string(instances) + " matrices"};
}

inline Outcome regularized_closed_form(int instances, std::uint64_t seed) {
  testing_support::Draw draw(seed);
  int kkt_bad = 0, obj_bad = 0;
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const long n = draw.integer(1, 3);
    const long big_n = draw.integer(n + 1, 8);
    const Matrix x = draw.matrix(n, big_n);
    Vector y = x.transpose() * draw.vector(n) + 0.1 * draw.vector(big_n);
    for (long t = 0; t < big_n; ++t)
      if (draw.coin(0.25)) y(t) += draw.uniform(-20.0, 20.0);
    const double lambda = std::pow(10.0, draw.uniform(-2.0, 0.5));
    const Dataset data = make_dataset(x, y);
    const RegularizedSolution sol = solve_regularized(data, lambda);
    if (!check_regularized_kkt(data, lambda, sol, 1e-7)) ++kkt_bad;
    const double gap = std::abs(sol.objective - oracle::regularized_min(x, y, lambda));
    worst = std::max(worst, gap);
    if (gap > 1e-6) ++obj_bad;
  }
  return {kkt_bad == 0 && obj_bad == 0, "KKT failures " + std::to_string(kkt_bad) +
                                            ", objective mismatches " + std::to_string(obj_bad) +
                                            ", worst gap " + fmt(worst)};
}

inline Outcome error_bound_validity(int instances, std::uint64_t seed) {
  testing_support::Draw draw(seed);
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    GenSpec s;
    s.n = draw.integer(1, 3);
    s.samples = draw.integer(s.n + 4, 12);
    s.outlier_fraction = draw.uniform(0.0, 0.3);
    s.noise_snr_db = draw.uniform(10.0, 30.0);
    s.seed = static_cast<std::uint64_t>(draw.integer(0, 1L << 40));
    const Dataset d = generate(s);
    const double lambda = std::pow(10.0, draw.uniform(-2.0, 0.0));
    const RegularizedSolution sol = solve_regularized(d, lambda);
    const ErrorBoundConstants kc = error_bound_constants(d.regressors);
    if (kc.exactness != Exactness::exact) return {false, "K1/K2 were not exact"};
    IndexSet outliers;
    for (Index t = 0; t < d.samples(); ++t)
      if (d.truth->gross(t) != 0.0) outliers.push_back(t);
    const double eps = d.truth->noise.cwiseAbs().maxCoeff();
    const double big_m = d.truth->gross.cwiseAbs().maxCoeff();
    const double bound = evaluate_error_bound(kc.k1, kc.k2, kc.j_set, eps, big_m, lambda, outliers);
    const double err = (sol.theta - d.truth->theta0).norm();
    worst = std::max(worst, err / bound);
    if (err > bound) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations, largest error/bound ratio " +
                               fmt(worst)};
}

inline std::string row_summary(const ResultTable& t, const std::string& column) {
  std::string s;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    s += (i ? " " : "") + fmt(t.rows[i].x) + ":" + fmt(t.value(i, column));
  return s;
}

inline Outcome fig1a_recovery() {
  ExperimentConfig c;
  c.scenario = Scenario::static_linear;
  c.gen.n = 4;
  c.gen.samples = 200;
  c.fractions = {0.2, 0.5};
  c.trials = 50;
  c.seed = 1;
  const ResultTable t = run_experiment(c);
  const double p02 = t.value(0, "recovery_probability"), p05 = t.value(1, "recovery_probability");
  return {p02 >= 0.95 && p05 >= 0.9, "recovery at 0.2: " + fmt(p02) + ", at 0.5: " + fmt(p05)};
}

inline Outcome affine_ceiling() {
  ExperimentConfig c;
  c.scenario = Scenario::static_affine_positive;
  c.gen.n = 4;
  c.gen.samples = 200;
  c.fractions = {0.6};
  c.trials = 50;
  c.seed = 1;
  const double p = run_experiment(c).value(0, "recovery_probability");
  return {p <= 0.1, "recovery at 0.6 with same-sign outliers: " + fmt(p)};
}

inline Outcome noisy_curve() {
  ExperimentConfig c;
  c.scenario = Scenario::noisy_static;
  c.gen.n = 4;
  c.gen.samples = 200;
  c.gen.noise_snr_db = 20.0;
  c.fractions = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  c.trials = 50;
  c.lambda = 0.1;
  c.seed = 1;
  const ResultTable t = run_experiment(c);
  double gap_reg = 0.0, gap_oracle = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double l1 = t.value(i, "l1_relative_error");
    const double reg = t.value(i, "regularized_relative_error");
    const double orc = t.value(i, "oracle_relative_error");
    gap_reg = std::max(gap_reg, std::abs(l1 - reg));
    gap_oracle = std::max({gap_oracle, std::abs(l1 - orc), std::abs(reg - orc)});
  }
  return {gap_reg <= 0.05 && gap_oracle <= 0.1,
          "max |l1 - regularized| " + fmt(gap_reg) + ", max gap to oracle " + fmt(gap_oracle)};
}

inline Outcome reweighting_gain() {
  ExperimentConfig c;
  c.scenario = Scenario::arx_reweighted;
  c.gen.samples = 30;
  c.gen.arx_params = ArxParams{2, 2, 1, Vector(), Vector()};
  c.fractions = {0.3};
  c.trials = 50;
  c.r_max = 2;
  c.seed = 1;
  const ResultTable t = run_experiment(c);
  const double plain = t.value(0, "recovery_probability");
  const double rw = t.value(0, "recovery_probability_reweighted");
  return {rw > plain, "plain l1 " + fmt(plain) + ", reweighted (r_max = 2) " + fmt(rw)};
}

inline Outcome bound_ordering() {
  ExperimentConfig c;
  c.scenario = Scenario::bound_comparison;
  c.gen.n = 4;
  c.trials = 20;
  c.sample_sizes = {50, 100, 200};
  c.seed = 1;
  const ResultTable t = run_experiment(c);
  int bad = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.value(i, "static_rn") < t.value(i, "static_r")) ++bad;
    if (t.value(i, "arx_rn") < t.value(i, "arx_r")) ++bad;
    for (const char* k : {"r", "rn", "coherence"})
      if (t.value(i, std::string("arx_") + k) > t.value(i, std::string("static_") + k)) ++bad;
  }
  return {bad == 0, "static r/rn " + row_summary(t, "static_r") + " / " + row_summary(t, "static_rn") +
                        "; arx r/rn " + row_summary(t, "arx_r") + " / " + row_summary(t, "arx_rn")};
}

inline Outcome multivariable_reduction() {
  ExperimentConfig c;
  c.scenario = Scenario::static_linear;
  c.gen.n = 3;
  c.gen.samples = 60;
  c.fractions = {0.0, 0.3, 0.5, 0.7};
  c.trials = 20;
  c.seed = 4;
  const ResultTable l1 = run_experiment(c);
  c.scenario = Scenario::multivariable;
  c.outputs_dim = 1;
  const ResultTable son = run_experiment(c);
  bool same = true;
  for (std::size_t i = 0; i < l1.rows.size(); ++i)
    same = same && l1.value(i, "recovery_probability") == son.value(i, "recovery_probability");

  testing_support::Draw draw(12);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const long m = draw.integer(2, 4), big_n = draw.integer(10, 40);
    const long clean = static_cast<long>(std::ceil(0.6 * static_cast<double>(big_n)));
    const Vector truth = draw.vector(m);
    Matrix pts(m, big_n);
    for (long t = 0; t < big_n; ++t)
      pts.col(t) = t < clean ? truth : Vector(truth + 50.0 * draw.vector(m));
    worst = std::max(worst, (geometric_median(pts) - truth).norm());
  }
  return {same && worst <= 1e-6, std::string(same ? "m = 1 curve identical" : "m = 1 curve differs") +
                                     ", geometric median worst error " + fmt(worst)};
}

inline Outcome asymptotic_consistency() {
  ExperimentConfig c;
  c.scenario = Scenario::asymptotic_consistency;
  c.gen.n = 4;
  c.trials = 20;
  c.sample_sizes = {250, 500, 1000, 2000};
  c.fractions = {0.9};
  c.seed = 1;
  const ResultTable t = run_experiment(c);
  bool monotone = true;
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    monotone = monotone &&
               t.value(i, "symmetric_mean_error") <= t.value(i - 1, "symmetric_mean_error") + 1e-12;
  const std::size_t last = t.rows.size() - 1;
  const double sym = t.value(last, "symmetric_mean_relative_error");
  const double asym = t.value(last, "asymmetric_mean_relative_error");
  return {monotone && sym <= 0.05 && asym > 0.05,
          "symmetric " + row_summary(t, "symmetric_mean_error") + (monotone ? " (monotone)" : " (not monotone)") +
              ", relative at 2000: " + fmt(sym) + ", asymmetric relative " + fmt(asym)};
}

}  // namespace acceptance
