#pragma once

#include "robl1/datamodel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace robl1 {

enum class Scenario {
  static_linear,
  static_affine,
  static_affine_positive,
  static_linear_positive,
  noisy_static,
  arx,
  arx_reweighted,
  bound_comparison,
  multivariable,
  asymptotic_consistency,
};

struct ExperimentConfig {
  Scenario scenario = Scenario::static_linear;
  /// Template; fraction, seed, sign mode and regressor kind are overridden per scenario.
  /// For arx scenarios, arx_params with empty coefficient vectors means a fresh stable
  /// system of those orders is sampled in every trial.
  GenSpec gen;
  std::vector<double> fractions{0.0};
  int trials = 50;
  double recovery_tol = 1e-5;
  std::optional<double> lambda;
  std::optional<int> r_max;
  std::uint64_t seed = 0;
  /// Sweep over N for bound_comparison and asymptotic_consistency.
  std::vector<Index> sample_sizes;
  /// Output dimension m for the multivariable scenario.
  Index outputs_dim = 1;
  /// Worker threads for trials; results do not depend on it.
  int threads = 1;

  void validate() const;
};

struct ResultRow {
  double x = 0.0;
  std::vector<double> values;  // aligned with ResultTable::columns
};

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<ResultRow> rows;
  /// Config echo as JSON.
  std::string metadata;
  /// 12 hex digits derived from the config.
  std::string run_id;

  /// Column value of a row by name; throws InvalidArgument for unknown names.
  double value(std::size_t row, const std::string& column) const;
};

/// Seed of one trial: hash(master, scenario tag, fraction index, trial index).
std::uint64_t trial_seed(std::uint64_t master, std::string_view tag, std::size_t point,
                         int trial);

ResultTable run_recovery_curve(const ExperimentConfig& config);
ResultTable run_noisy_error_curve(const ExperimentConfig& config);
ResultTable run_bound_comparison(const ExperimentConfig& config);
ResultTable run_asymptotic_consistency(const ExperimentConfig& config);
ResultTable run_multivariable_curve(const ExperimentConfig& config);
/// Dispatches on config.scenario.
ResultTable run_experiment(const ExperimentConfig& config);

/// The fixed system y_t = -0.40 y_{t-1} + 0.25 y_{t-2} - 0.15 u_{t-1} (n_a = 2, n_b = 1).
ArxParams bound_comparison_arx();

/// `x,<columns>` with a leading "# metadata: <json>" line.
void write_table_csv(std::ostream& out, const ResultTable& table);
void write_table_json(std::ostream& out, const ResultTable& table);

const char* to_string(Scenario s);
Scenario scenario_from_string(std::string_view name);

}  // namespace robl1
