#include "cli.hpp"

#include "robl1/robl1.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

namespace robl1::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

std::string join_invocation(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) s += ' ';
    s += i == 0 ? std::filesystem::path(argv[0]).filename().string() : std::string(argv[i]);
  }
  return s;
}

void require_input(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!fs::is_regular_file(path)) throw UsageError(std::string(flag) + ": no such file '" + path + "'");
}

void require_output(const std::string& path) {
  if (path.empty()) throw UsageError("--out is required");
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw UsageError("--out: directory '" + parent.string() + "' does not exist");
}

MultiDataset as_multi(const Dataset& d) {
  MultiDataset m;
  m.regressors = d.regressors;
  m.outputs = d.outputs.transpose();
  return m;
}

struct Options {
  std::string spec, data, theta, config, out, method = "l1", solver = "exact", format;
  double lambda = 0.10;
  int rmax = 2;
  double delta = 0.0;
  double tol = kCertificateTol;
  double partition_tol = kDefaultPartitionTol;
  long long exact_cap = 15;
  bool normalize = false;
  bool strict = false;
  int threads = 1;
};

int run_generate(const Options& o, const std::string& invocation, std::ostream& out) {
  require_input(o.spec, "--spec");
  require_output(o.out);
  const GenSpec spec = json::gen_spec_from_json(io::read_text(o.spec));
  const Dataset data = generate(spec);
  io::write_dataset(o.out, data, "invocation: " + invocation);
  io::write_truth_sidecars(o.out, *data.truth);
  out << "wrote " << data.samples() << " samples (n = " << data.dim() << ") to " << o.out << "\n";
  return kExitOk;
}

int run_estimate(const Options& o, const std::string& invocation, std::ostream& out) {
  require_input(o.data, "--data");
  require_output(o.out);
  SolverOptions opts;
  if (o.solver == "first-order") {
    opts.method = L1Method::first_order;
  } else if (o.solver != "exact") {
    throw UsageError("--solver must be exact or first-order");
  }
  const Dataset data = io::read_dataset(o.data);
  std::string doc;
  if (o.method == "l1" || o.method == "reweighted") {
    Estimate est;
    std::string body;
    if (o.method == "l1") {
      est = solve_l1(data, opts);
      body = json::to_json(est, invocation);
    } else {
      const double delta = o.delta > 0.0 ? o.delta : default_reweight_delta(data);
      const ReweightedResult res = solve_reweighted_l1(data, o.rmax, delta, opts);
      est = res.estimate;
      body = json::to_json(res, invocation);
    }
    const Certificate cert = check_optimal(data, est.theta, o.tol, o.partition_tol);
    doc = json::merge_field(body, "certificate", json::to_json(cert));
  } else if (o.method == "regularized") {
    const RegularizedSolution sol = solve_regularized(data, o.lambda, opts);
    doc = json::merge_field(json::to_json(sol, invocation), "kkt",
                            check_regularized_kkt(data, o.lambda, sol) ? "true" : "false");
  } else if (o.method == "sum-of-norms") {
    const MultiDataset multi = as_multi(data);
    const MatrixEstimate est = solve_sum_of_norms(multi, opts);
    doc = json::merge_field(json::to_json(est, invocation), "t3_value",
                            json::number(t3_value(multi, est.a)));
  } else {
    throw UsageError("--method must be l1, reweighted, regularized or sum-of-norms");
  }
  io::write_text(o.out, doc + "\n");
  out << "wrote " << o.method << " estimate to " << o.out << "\n";
  return kExitOk;
}

int run_certify(const Options& o, const std::string& invocation, std::ostream& out) {
  require_input(o.data, "--data");
  require_input(o.theta, "--theta");
  require_output(o.out);
  const Dataset data = io::read_dataset(o.data);
  const Vector theta = json::theta_from_json(io::read_text(o.theta));
  const Certificate cert = check_optimal(data, theta, o.tol, o.partition_tol);
  io::write_text(o.out, json::to_json(cert, invocation) + "\n");
  out << "optimal=" << (cert.optimal ? "true" : "false") << " s3=" << cert.s3_value << "\n";
  return kExitOk;
}

int run_bounds(const Options& o, const std::string& invocation, std::ostream& out) {
  require_input(o.data, "--data");
  require_output(o.out);
  if (o.exact_cap < 1) throw UsageError("--exact-cap must be positive");
  const Dataset data = io::read_dataset(o.data);
  EnumerationCaps caps;
  caps.k_samples = static_cast<Index>(o.exact_cap);
  const Matrix x = o.normalize ? normalize_columns(data.regressors) : data.regressors;
  const BoundsReport rep = compute_bounds(x, caps);
  if (o.strict && (rep.nu.exactness != Exactness::exact || !rep.k1 || !rep.k2))
    throw CapExceeded("N = " + std::to_string(x.cols()) + " is beyond the exhaustive caps (--exact-cap " +
                      std::to_string(o.exact_cap) + ")");
  io::write_text(o.out, json::to_json(rep, invocation) + "\n");
  out << "nu_n=" << rep.nu.nu_n << " (" << to_string(rep.nu.exactness) << ") r=" << rep.r << "\n";
  return kExitOk;
}

int run_experiment_cmd(const Options& o, const std::string& invocation, std::ostream& out) {
  require_input(o.config, "--config");
  require_output(o.out);
  std::string format = o.format;
  if (format.empty()) format = fs::path(o.out).extension() == ".json" ? "json" : "csv";
  if (format != "csv" && format != "json") throw UsageError("--format must be csv or json");
  ExperimentConfig config = json::experiment_config_from_json(io::read_text(o.config));
  if (o.threads > 1) config.threads = o.threads;
  const ResultTable table = run_experiment(config);
  std::ofstream file(o.out);
  if (!file) throw InvalidArgument("cannot open '" + o.out + "' for writing");
  if (format == "csv") {
    file << "# invocation: " << invocation << "\n";
    write_table_csv(file, table);
  } else {
    file << json::to_json(table, invocation) << "\n";
  }
  out << "wrote " << table.rows.size() << " rows to " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust l1 estimation toolkit"};
  app.require_subcommand(1, 1);
  Options o;

  auto* gen = app.add_subcommand("generate", "Generate a dataset from a JSON GenSpec");
  gen->add_option("--spec", o.spec, "GenSpec JSON file")->required();
  gen->add_option("--out", o.out, "Dataset CSV to write")->required();

  auto* est = app.add_subcommand("estimate", "Estimate parameters from a dataset");
  est->add_option("--data", o.data, "Dataset CSV")->required();
  est->add_option("--method", o.method, "l1 | reweighted | regularized | sum-of-norms");
  est->add_option("--solver", o.solver, "exact | first-order (l1 path)");
  est->add_option("--lambda", o.lambda, "Regularization weight");
  est->add_option("--rmax", o.rmax, "Reweighting iterations");
  est->add_option("--delta", o.delta, "Reweighting regularizer (default from data)");
  est->add_option("--tol", o.tol, "Certificate tolerance");
  est->add_option("--out", o.out, "Estimate JSON to write")->required();

  auto* cert = app.add_subcommand("certify", "Check optimality and uniqueness of a parameter");
  cert->add_option("--data", o.data, "Dataset CSV")->required();
  cert->add_option("--theta", o.theta, "Estimate JSON (or bare array)")->required();
  cert->add_option("--tol", o.tol, "Certificate tolerance");
  cert->add_option("--partition-tol", o.partition_tol, "Zero-residual tolerance");
  cert->add_option("--out", o.out, "Certificate JSON to write")->required();

  auto* bnd = app.add_subcommand("bounds", "Genericity index and recovery thresholds");
  bnd->add_option("--data", o.data, "Dataset CSV")->required();
  bnd->add_option("--exact-cap", o.exact_cap, "Largest N for exhaustive k1/k2");
  bnd->add_flag("--normalize", o.normalize, "Scale columns to unit norm first");
  bnd->add_flag("--strict", o.strict, "Fail with exit code 4 unless every quantity is exact");
  bnd->add_option("--out", o.out, "Bounds JSON to write")->required();

  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo sweep");
  exp->add_option("--config", o.config, "ExperimentConfig JSON")->required();
  exp->add_option("--format", o.format, "csv | json (default from extension)");
  exp->add_option("--threads", o.threads, "Worker threads");
  exp->add_option("--out", o.out, "Result table to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  const std::string invocation = join_invocation(argc, argv);
  try {
    if (gen->parsed()) return run_generate(o, invocation, out);
    if (est->parsed()) return run_estimate(o, invocation, out);
    if (cert->parsed()) return run_certify(o, invocation, out);
    if (bnd->parsed()) return run_bounds(o, invocation, out);
    return run_experiment_cmd(o, invocation, out);
  } catch (const CapExceeded& e) {
    err << "cap exceeded: " << e.what() << "\n";
    return kExitCap;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace robl1::cli
