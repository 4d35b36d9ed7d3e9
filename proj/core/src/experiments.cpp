#include "robl1/experiments.hpp"

#include "robl1/bounds.hpp"
#include "robl1/certificates.hpp"
#include "robl1/errors.hpp"
#include "robl1/rng.hpp"
#include "robl1/serialize.hpp"
#include "robl1/solvers.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>

namespace robl1 {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::pair<Scenario, const char*>, 10> kScenarioNames{{
    {Scenario::static_linear, "static_linear"},
    {Scenario::static_affine, "static_affine"},
    {Scenario::static_affine_positive, "static_affine_positive"},
    {Scenario::static_linear_positive, "static_linear_positive"},
    {Scenario::noisy_static, "noisy_static"},
    {Scenario::arx, "arx"},
    {Scenario::arx_reweighted, "arx_reweighted"},
    {Scenario::bound_comparison, "bound_comparison"},
    {Scenario::multivariable, "multivariable"},
    {Scenario::asymptotic_consistency, "asymptotic_consistency"},
}};

/// Runs body(trial) for trial in [0, trials) on `threads` workers; results land by index.
template <class T>
std::vector<T> run_trials(int trials, int threads, const std::function<T(int)>& body) {
  std::vector<T> out(static_cast<std::size_t>(trials));
  const int workers = std::max(1, std::min(threads, trials));
  if (workers == 1) {
    for (int t = 0; t < trials; ++t) out[static_cast<std::size_t>(t)] = body(t);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next++; t < trials; t = next++) out[static_cast<std::size_t>(t)] = body(t);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

ResultTable make_table(const ExperimentConfig& config, std::vector<std::string> columns) {
  ResultTable table;
  table.columns = std::move(columns);
  table.metadata = json::compact(json::to_json(config));
  const std::uint64_t h = hash_label(table.metadata);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  table.run_id = std::string(buf).substr(0, 12);
  return table;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    sum += x;
    ++count;
  }
  return count == 0 ? kNaN : sum / static_cast<double>(count);
}

GenSpec spec_for_trial(const ExperimentConfig& config, double fraction, std::uint64_t seed) {
  GenSpec spec = config.gen;
  spec.outlier_fraction = fraction;
  spec.seed = seed;
  switch (config.scenario) {
    case Scenario::static_linear:
    case Scenario::multivariable:
      spec.regressor_kind = RegressorKind::gaussian;
      spec.sign_mode = SignMode::two_sided;
      break;
    case Scenario::static_linear_positive:
      spec.regressor_kind = RegressorKind::gaussian;
      spec.sign_mode = SignMode::positive_only;
      break;
    case Scenario::static_affine:
      spec.regressor_kind = RegressorKind::affine_gaussian;
      spec.sign_mode = SignMode::two_sided;
      break;
    case Scenario::static_affine_positive:
      spec.regressor_kind = RegressorKind::affine_gaussian;
      spec.sign_mode = SignMode::positive_only;
      break;
    case Scenario::noisy_static:
      if (spec.regressor_kind != RegressorKind::affine_gaussian) spec.regressor_kind = RegressorKind::gaussian;
      if (!spec.noise_snr_db) spec.noise_snr_db = 20.0;
      break;
    case Scenario::arx:
    case Scenario::arx_reweighted: {
      spec.regressor_kind = RegressorKind::arx;
      ArxParams p = config.gen.arx_params.value_or(ArxParams{2, 2, 1, {}, {}});
      if (p.a.size() == 0 && p.b.size() == 0) p = sample_stable_arx(p.n_a, p.n_b, seed);
      spec.n = p.regressor_dim();
      spec.arx_params = p;
      break;
    }
    default:
      break;
  }
  return spec;
}

bool is_recovery_scenario(Scenario s) {
  switch (s) {
    case Scenario::static_linear:
    case Scenario::static_affine:
    case Scenario::static_affine_positive:
    case Scenario::static_linear_positive:
    case Scenario::arx:
    case Scenario::arx_reweighted:
      return true;
    default:
      return false;
  }
}

const char* seed_tag(Scenario s) {
  // m = 1 multivariable runs reuse the static_linear seeds so both curves see the same data.
  return s == Scenario::multivariable ? "static_linear" : to_string(s);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw InvalidArgument("experiment: trials must be >= 1");
  if (!(recovery_tol > 0.0)) throw InvalidArgument("experiment: recovery_tol must be positive");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0))
      throw InvalidArgument("experiment: fractions must lie in [0, 1]");
    if (i > 0 && !(fractions[i] > fractions[i - 1]))
      throw InvalidArgument("experiment: fractions must be strictly increasing");
  }
  for (Index n : sample_sizes) {
    if (n < 1) throw InvalidArgument("experiment: sample sizes must be positive");
  }
  if (lambda && !(*lambda > 0.0)) throw InvalidArgument("experiment: lambda must be positive");
  if (r_max && *r_max < 0) throw InvalidArgument("experiment: r_max must be nonnegative");
  if (outputs_dim < 1) throw InvalidArgument("experiment: outputs_dim must be >= 1");
  if (threads < 1) throw InvalidArgument("experiment: threads must be >= 1");
}

double ResultTable::value(std::size_t row, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw InvalidArgument("no column named " + column);
  return rows.at(row).values.at(static_cast<std::size_t>(it - columns.begin()));
}

std::uint64_t trial_seed(std::uint64_t master, std::string_view tag, std::size_t point, int trial) {
  return hash_combine({master, hash_label(tag), static_cast<std::uint64_t>(point),
                       static_cast<std::uint64_t>(trial)});
}

ResultTable run_recovery_curve(const ExperimentConfig& config) {
  config.validate();
  if (!is_recovery_scenario(config.scenario))
    throw InvalidArgument(std::string("recovery curve: unsupported scenario ") + to_string(config.scenario));
  const bool reweight = config.scenario == Scenario::arx_reweighted || config.r_max.has_value();
  const int r_max = config.r_max.value_or(2);

  std::vector<std::string> cols{"recovery_probability", "certified_rate", "failures"};
  if (reweight) cols.insert(cols.begin() + 1, "recovery_probability_reweighted");
  ResultTable table = make_table(config, cols);

  struct Trial {
    int l1 = 0;
    int reweighted = 0;
    int certified = 0;
    int failed = 0;
  };
  for (std::size_t fi = 0; fi < config.fractions.size(); ++fi) {
    const double fraction = config.fractions[fi];
    const auto results = run_trials<Trial>(config.trials, config.threads, [&](int trial) {
      Trial out;
      try {
        const GenSpec spec = spec_for_trial(config, fraction, trial_seed(config.seed, seed_tag(config.scenario), fi, trial));
        const Dataset data = generate(spec);
        const Vector& theta0 = data.truth->theta0;
        const Estimate est = solve_l1(data);
        out.l1 = (est.theta - theta0).norm() <= config.recovery_tol;
        out.certified = check_optimal(data, est.theta).optimal;
        if (reweight) {
          const ReweightedResult rw = solve_reweighted_l1(data, r_max, default_reweight_delta(data));
          out.reweighted = (rw.estimate.theta - theta0).norm() <= config.recovery_tol;
        }
      } catch (const Error&) {
        out = Trial{0, 0, 0, 1};
      }
      return out;
    });
    Trial sum;
    for (const Trial& t : results) {
      sum.l1 += t.l1;
      sum.reweighted += t.reweighted;
      sum.certified += t.certified;
      sum.failed += t.failed;
    }
    const double trials = config.trials;
    ResultRow row{fraction, {sum.l1 / trials}};
    if (reweight) row.values.push_back(sum.reweighted / trials);
    const int ran = config.trials - sum.failed;
    row.values.push_back(ran > 0 ? sum.certified / static_cast<double>(ran) : kNaN);
    row.values.push_back(sum.failed);
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable run_noisy_error_curve(const ExperimentConfig& config) {
  config.validate();
  const double lambda = config.lambda.value_or(0.10);
  ResultTable table = make_table(config, {"l1_relative_error", "regularized_relative_error",
                                          "oracle_relative_error", "failures"});
  using Errors = std::array<double, 3>;
  for (std::size_t fi = 0; fi < config.fractions.size(); ++fi) {
    const double fraction = config.fractions[fi];
    const auto results = run_trials<Errors>(config.trials, config.threads, [&](int trial) {
      try {
        GenSpec spec = spec_for_trial(config, fraction, trial_seed(config.seed, seed_tag(config.scenario), fi, trial));
        if (config.scenario != Scenario::noisy_static && !spec.noise_snr_db) spec.noise_snr_db = 20.0;
        const Dataset data = generate(spec);
        const Truth& truth = *data.truth;
        const double scale = truth.theta0.norm();
        IndexSet inliers;
        for (Index t = 0; t < data.samples(); ++t) {
          if (truth.gross(t) == 0.0) inliers.push_back(t);
        }
        const Estimate l1 = solve_l1(data);
        const RegularizedSolution reg = solve_regularized(data, lambda);
        const Estimate oracle = least_squares_oracle(data, inliers);
        return Errors{(l1.theta - truth.theta0).norm() / scale,
                      (reg.theta - truth.theta0).norm() / scale,
                      (oracle.theta - truth.theta0).norm() / scale};
      } catch (const Error&) {
        return Errors{kNaN, kNaN, kNaN};
      }
    });
    std::array<std::vector<double>, 3> cols;
    int failed = 0;
    for (const Errors& e : results) {
      if (std::isnan(e[0])) ++failed;
      for (std::size_t c = 0; c < 3; ++c) cols[c].push_back(e[c]);
    }
    table.rows.push_back({fraction, {mean_of(cols[0]), mean_of(cols[1]), mean_of(cols[2]),
                                     static_cast<double>(failed)}});
  }
  return table;
}

ArxParams bound_comparison_arx() {
  ArxParams p;
  p.n_a = 2;
  p.n_b = 1;
  p.n_u = 1;
  p.a = Vector(2);
  p.a << -0.40, 0.25;
  p.b = Vector(2);
  p.b << 0.0, -0.15;
  return p;
}

ResultTable run_bound_comparison(const ExperimentConfig& config) {
  config.validate();
  if (config.sample_sizes.empty()) throw InvalidArgument("bound comparison needs sample_sizes");
  const ArxParams arx = bound_comparison_arx();
  const Index n = arx.regressor_dim();
  ResultTable table = make_table(config, {"static_r", "static_rn", "static_coherence", "arx_r",
                                          "arx_rn", "arx_coherence", "failures"});
  using Counts = std::array<double, 6>;
  const auto counts_of = [](const Matrix& x, double* out) {
    const Matrix xn = normalize_columns(x);
    out[0] = 1.0 / (2.0 * r_value(xn));
    out[1] = 1.0 / (2.0 * rn_value(xn));
    out[2] = coherence_bound(xn);
  };
  for (std::size_t si = 0; si < config.sample_sizes.size(); ++si) {
    const Index samples = config.sample_sizes[si];
    const auto results = run_trials<Counts>(config.trials, config.threads, [&](int trial) {
      Counts c;
      c.fill(kNaN);
      try {
        const std::uint64_t seed = trial_seed(config.seed, seed_tag(config.scenario), si, trial);
        GenSpec stat = config.gen;
        stat.regressor_kind = RegressorKind::gaussian;
        stat.n = n;
        stat.samples = samples;
        stat.outlier_fraction = 0.0;
        stat.noise_snr_db.reset();
        stat.seed = seed;
        counts_of(generate(stat).regressors, c.data());
        GenSpec dyn = stat;
        dyn.regressor_kind = RegressorKind::arx;
        dyn.arx_params = arx;
        counts_of(generate(dyn).regressors, c.data() + 3);
      } catch (const Error&) {
        c.fill(kNaN);
      }
      return c;
    });
    std::array<std::vector<double>, 6> cols;
    int failed = 0;
    for (const Counts& c : results) {
      if (std::isnan(c[0]) || std::isnan(c[3])) ++failed;
      for (std::size_t k = 0; k < 6; ++k) cols[k].push_back(c[k]);
    }
    ResultRow row{static_cast<double>(samples), {}};
    for (auto& col : cols) row.values.push_back(mean_of(col));
    row.values.push_back(failed);
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable run_asymptotic_consistency(const ExperimentConfig& config) {
  config.validate();
  if (config.sample_sizes.empty()) throw InvalidArgument("asymptotic consistency needs sample_sizes");
  const double fraction = config.fractions.empty() ? 0.9 : config.fractions.back();
  ResultTable table = make_table(config, {"symmetric_mean_error", "symmetric_mean_relative_error",
                                          "asymmetric_mean_error", "asymmetric_mean_relative_error",
                                          "failures"});
  using Errors = std::array<double, 4>;
  for (std::size_t si = 0; si < config.sample_sizes.size(); ++si) {
    const Index samples = config.sample_sizes[si];
    const auto results = run_trials<Errors>(config.trials, config.threads, [&](int trial) {
      Errors e;
      e.fill(kNaN);
      try {
        GenSpec spec = config.gen;
        spec.regressor_kind = RegressorKind::affine_gaussian;
        spec.samples = samples;
        spec.outlier_fraction = fraction;
        spec.noise_snr_db.reset();
        spec.seed = trial_seed(config.seed, seed_tag(config.scenario), si, trial);
        // Symmetric zero-mean outliers satisfy the hypothesis; folding them positive breaks it.
        spec.outlier_mean = 0.0;
        spec.sign_mode = SignMode::two_sided;
        const Dataset sym = generate(spec);
        spec.sign_mode = SignMode::positive_only;
        const Dataset asym = generate(spec);
        const double scale = sym.truth->theta0.norm();
        const double es = (solve_l1(sym).theta - sym.truth->theta0).norm();
        const double ea = (solve_l1(asym).theta - asym.truth->theta0).norm();
        e = {es, es / scale, ea, ea / scale};
      } catch (const Error&) {
        e.fill(kNaN);
      }
      return e;
    });
    std::array<std::vector<double>, 4> cols;
    int failed = 0;
    for (const Errors& e : results) {
      if (std::isnan(e[0])) ++failed;
      for (std::size_t k = 0; k < 4; ++k) cols[k].push_back(e[k]);
    }
    ResultRow row{static_cast<double>(samples), {}};
    for (auto& col : cols) row.values.push_back(mean_of(col));
    row.values.push_back(failed);
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable run_multivariable_curve(const ExperimentConfig& config) {
  config.validate();
  ResultTable table = make_table(config, {"recovery_probability", "certified_rate", "failures"});
  struct Trial {
    int recovered = 0;
    int certified = 0;
    int failed = 0;
  };
  for (std::size_t fi = 0; fi < config.fractions.size(); ++fi) {
    const double fraction = config.fractions[fi];
    const auto results = run_trials<Trial>(config.trials, config.threads, [&](int trial) {
      Trial out;
      try {
        GenSpec spec = config.gen;
        if (spec.regressor_kind != RegressorKind::affine_gaussian) spec.regressor_kind = RegressorKind::gaussian;
        spec.outlier_fraction = fraction;
        spec.seed = trial_seed(config.seed, seed_tag(config.scenario), fi, trial);
        const MultiDataset data = generate_multi(config.outputs_dim, spec);
        const MatrixEstimate est = solve_sum_of_norms(data);
        out.recovered = (est.a - data.truth->a0).norm() <= config.recovery_tol;
        out.certified = est.status == SolveStatus::optimal;
      } catch (const Error&) {
        out = Trial{0, 0, 1};
      }
      return out;
    });
    Trial sum;
    for (const Trial& t : results) {
      sum.recovered += t.recovered;
      sum.certified += t.certified;
      sum.failed += t.failed;
    }
    const double trials = config.trials;
    const int ran = config.trials - sum.failed;
    table.rows.push_back({fraction, {sum.recovered / trials,
                                     ran > 0 ? sum.certified / static_cast<double>(ran) : kNaN,
                                     static_cast<double>(sum.failed)}});
  }
  return table;
}

ResultTable run_experiment(const ExperimentConfig& config) {
  switch (config.scenario) {
    case Scenario::noisy_static:
      return run_noisy_error_curve(config);
    case Scenario::bound_comparison:
      return run_bound_comparison(config);
    case Scenario::asymptotic_consistency:
      return run_asymptotic_consistency(config);
    case Scenario::multivariable:
      return run_multivariable_curve(config);
    default:
      return run_recovery_curve(config);
  }
}

void write_table_csv(std::ostream& out, const ResultTable& table) {
  out << "# metadata: " << table.metadata << "\n";
  out << "# run_id: " << table.run_id << "\n";
  out << "x";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  char buf[64];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (const auto& row : table.rows) {
    put(row.x);
    for (double v : row.values) {
      out << ',';
      put(v);
    }
    out << '\n';
  }
}

void write_table_json(std::ostream& out, const ResultTable& table) {
  out << json::to_json(table) << '\n';
}

const char* to_string(Scenario s) {
  for (const auto& [value, name] : kScenarioNames) {
    if (value == s) return name;
  }
  return "static_linear";
}

Scenario scenario_from_string(std::string_view name) {
  for (const auto& [value, label] : kScenarioNames) {
    if (name == label) return value;
  }
  throw InvalidArgument("unknown scenario '" + std::string(name) + "'");
}

}  // namespace robl1
