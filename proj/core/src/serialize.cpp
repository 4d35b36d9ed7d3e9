#include "robl1/serialize.hpp"

#include "robl1/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <string>

namespace robl1::json {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

ordered_json envelope(const std::string& invocation) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  if (!invocation.empty()) j["invocation"] = invocation;
  return j;
}

ordered_json real(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json vec(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(real(v(i)));
  return a;
}

ordered_json mat(const Matrix& m) {
  ordered_json a = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

ordered_json idx(const IndexSet& s) {
  ordered_json a = ordered_json::array();
  for (Index i : s) a.push_back(i);
  return a;
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::iteration_limit:
      return "iteration_limit";
    case SolveStatus::infeasible_input:
      return "infeasible_input";
  }
  return "optimal";
}

const char* kind_name(RegressorKind k) {
  switch (k) {
    case RegressorKind::gaussian:
      return "gaussian";
    case RegressorKind::affine_gaussian:
      return "affine_gaussian";
    case RegressorKind::arx:
      return "arx";
    case RegressorKind::state_estimation:
      return "state_estimation";
  }
  return "gaussian";
}

RegressorKind kind_from(const std::string& s) {
  if (s == "gaussian") return RegressorKind::gaussian;
  if (s == "affine_gaussian") return RegressorKind::affine_gaussian;
  if (s == "arx") return RegressorKind::arx;
  if (s == "state_estimation") return RegressorKind::state_estimation;
  throw InvalidArgument("unknown regressor_kind '" + s + "'");
}

Vector vec_from(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(std::string(what) + " must be an array of numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix mat_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(std::string(what) + " must be a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector row = vec_from(j[i], what);
    if (static_cast<std::size_t>(row.size()) != cols) throw InvalidArgument(std::string(what) + " rows differ in length");
    m.row(static_cast<Index>(i)) = row.transpose();
  }
  return m;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("field '") + key + "' has the wrong type");
  }
}

ordered_json gen_spec_object(const GenSpec& s) {
  ordered_json j;
  j["n"] = s.n;
  j["N"] = s.samples;
  j["regressor_kind"] = kind_name(s.regressor_kind);
  j["outlier_fraction"] = s.outlier_fraction;
  j["outlier_mean"] = s.outlier_mean;
  j["outlier_std"] = s.outlier_std;
  j["sign_mode"] = s.sign_mode == SignMode::positive_only ? "positive_only" : "two_sided";
  j["noise_snr_db"] = s.noise_snr_db ? ordered_json(*s.noise_snr_db) : ordered_json(nullptr);
  j["seed"] = s.seed;
  if (s.arx_params) {
    const ArxParams& p = *s.arx_params;
    j["arx_params"] = {{"n_a", p.n_a}, {"n_b", p.n_b}, {"n_u", p.n_u}, {"a", vec(p.a)}, {"b", vec(p.b)}};
  } else {
    j["arx_params"] = nullptr;
  }
  if (s.lti_params) {
    const LtiParams& l = *s.lti_params;
    j["lti_params"] = {{"A", mat(l.a)}, {"B", mat(l.b)}, {"C", vec(l.c)}};
  } else {
    j["lti_params"] = nullptr;
  }
  return j;
}

GenSpec gen_spec_from(const json& j) {
  if (!j.is_object()) throw InvalidArgument("GenSpec must be a JSON object");
  GenSpec s;
  s.n = get_or<Index>(j, "n", s.n);
  s.samples = get_or<Index>(j, "N", s.samples);
  s.regressor_kind = kind_from(get_or<std::string>(j, "regressor_kind", "gaussian"));
  s.outlier_fraction = get_or<double>(j, "outlier_fraction", s.outlier_fraction);
  s.outlier_mean = get_or<double>(j, "outlier_mean", s.outlier_mean);
  s.outlier_std = get_or<double>(j, "outlier_std", s.outlier_std);
  const std::string sign = get_or<std::string>(j, "sign_mode", "two_sided");
  if (sign == "positive_only") {
    s.sign_mode = SignMode::positive_only;
  } else if (sign == "two_sided") {
    s.sign_mode = SignMode::two_sided;
  } else {
    throw InvalidArgument("unknown sign_mode '" + sign + "'");
  }
  if (j.contains("noise_snr_db") && !j["noise_snr_db"].is_null()) s.noise_snr_db = get_or<double>(j, "noise_snr_db", 0.0);
  s.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("arx_params") && !j["arx_params"].is_null()) {
    const json& a = j["arx_params"];
    ArxParams p;
    p.n_a = get_or<int>(a, "n_a", 0);
    p.n_b = get_or<int>(a, "n_b", 0);
    p.n_u = get_or<int>(a, "n_u", 1);
    if (a.contains("a")) p.a = vec_from(a["a"], "arx_params.a");
    if (a.contains("b")) p.b = vec_from(a["b"], "arx_params.b");
    s.arx_params = p;
    if (!j.contains("n") && s.regressor_kind == RegressorKind::arx) s.n = p.regressor_dim();
  }
  if (j.contains("lti_params") && !j["lti_params"].is_null()) {
    const json& l = j["lti_params"];
    if (!l.contains("A") || !l.contains("B") || !l.contains("C"))
      throw InvalidArgument("lti_params needs A, B and C");
    s.lti_params = LtiParams{mat_from(l["A"], "lti_params.A"), mat_from(l["B"], "lti_params.B"),
                             vec_from(l["C"], "lti_params.C")};
  }
  return s;
}

}  // namespace

std::string compact(const std::string& text) { return ordered_json::parse(text).dump(); }

std::string to_json(const Estimate& est, const std::string& invocation) {
  ordered_json j = envelope(invocation);
  j["theta"] = vec(est.theta);
  j["residuals"] = vec(est.residuals);
  j["objective"] = real(est.objective);
  j["status"] = status_name(est.status);
  j["iterations"] = est.iterations;
  return j.dump(2);
}

std::string to_json(const ReweightedResult& res, const std::string& invocation) {
  ordered_json j = ordered_json::parse(to_json(res.estimate, invocation));
  ordered_json iterates = ordered_json::array();
  for (const Vector& v : res.iterates) iterates.push_back(vec(v));
  j["iterates"] = iterates;
  return j.dump(2);
}

std::string to_json(const RegularizedSolution& sol, const std::string& invocation) {
  ordered_json j = envelope(invocation);
  j["theta"] = vec(sol.theta);
  j["phi"] = vec(sol.phi);
  j["lambda"] = sol.lambda;
  j["support"] = idx(sol.support);
  j["signs"] = vec(sol.signs);
  j["objective"] = real(sol.objective);
  j["status"] = status_name(sol.status);
  j["iterations"] = sol.iterations;
  return j.dump(2);
}

std::string to_json(const MatrixEstimate& est, const std::string& invocation) {
  ordered_json j = envelope(invocation);
  j["a"] = mat(est.a);
  j["objective"] = real(est.objective);
  j["status"] = status_name(est.status);
  j["iterations"] = est.iterations;
  return j.dump(2);
}

std::string to_json(const Certificate& cert, const std::string& invocation) {
  ordered_json j = envelope(invocation);
  j["s3_value"] = real(cert.s3_value);
  j["lambda_coeffs"] = vec(cert.lambda_coeffs);
  j["optimal"] = cert.optimal;
  j["unique"] = cert.unique ? ordered_json(*cert.unique) : ordered_json(nullptr);
  j["uniqueness"] = cert.optimal ? to_string(cert.uniqueness) : "not_evaluated";
  j["rank_evidence"] = {{"rank_I0", cert.rank_evidence.rank_i0},
                        {"s2prime_lp_value", cert.rank_evidence.s2prime_lp_value
                                                 ? real(*cert.rank_evidence.s2prime_lp_value)
                                                 : ordered_json(nullptr)}};
  j["partition"] = {{"plus", idx(cert.partition.plus)},
                    {"minus", idx(cert.partition.minus)},
                    {"zero", idx(cert.partition.zero)},
                    {"tol", cert.partition.tol}};
  j["s1prime_set"] = idx(cert.s1prime_set);
  j["tol"] = cert.tol;
  return j.dump(2);
}

std::string to_json(const BoundsReport& rep, const std::string& invocation) {
  ordered_json j = envelope(invocation);
  j["nu_n"] = rep.nu.nu_n;
  j["r"] = real(rep.r);
  j["r_n"] = real(rep.r_n);
  j["coherence_bound"] = rep.coherence_bound ? real(*rep.coherence_bound) : ordered_json(nullptr);
  j["threshold_r"] = real(rep.threshold_r);
  j["k1"] = rep.k1 ? ordered_json(*rep.k1) : ordered_json(nullptr);
  j["k2"] = rep.k2 ? ordered_json(*rep.k2) : ordered_json(nullptr);
  j["exactness"] = {{"nu_n", to_string(rep.nu.exactness)},
                    {"k1", to_string(rep.k1_exactness)},
                    {"k2", to_string(rep.k2_exactness)}};
  return j.dump(2);
}

std::string to_json(const GenSpec& spec, const std::string& invocation) {
  ordered_json j = envelope(invocation);
  const ordered_json body = gen_spec_object(spec);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2);
}

std::string to_json(const ExperimentConfig& c, const std::string& invocation) {
  ordered_json j = envelope(invocation);
  j["scenario"] = to_string(c.scenario);
  j["gen"] = gen_spec_object(c.gen);
  j["fractions"] = c.fractions;
  j["trials"] = c.trials;
  j["recovery_tol"] = c.recovery_tol;
  j["lambda"] = c.lambda ? ordered_json(*c.lambda) : ordered_json(nullptr);
  j["r_max"] = c.r_max ? ordered_json(*c.r_max) : ordered_json(nullptr);
  j["seed"] = c.seed;
  j["sample_sizes"] = c.sample_sizes;
  j["outputs_dim"] = c.outputs_dim;
  return j.dump(2);
}

std::string to_json(const ResultTable& table, const std::string& invocation) {
  ordered_json j = envelope(invocation);
  j["run_id"] = table.run_id;
  j["metadata"] = table.metadata.empty() ? ordered_json(nullptr) : ordered_json::parse(table.metadata);
  j["columns"] = table.columns;
  ordered_json rows = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json metrics;
    for (std::size_t c = 0; c < table.columns.size() && c < row.values.size(); ++c)
      metrics[table.columns[c]] = real(row.values[c]);
    rows.push_back({{"x", row.x}, {"metrics", metrics}});
  }
  j["rows"] = rows;
  return j.dump(2);
}

std::string merge_field(const std::string& document, const std::string& key,
                        const std::string& value) {
  ordered_json j = ordered_json::parse(document);
  ordered_json v = ordered_json::parse(value);
  if (v.is_object()) v.erase("schema_version");
  j[key] = v;
  return j.dump(2);
}

std::string number(double v) { return real(v).dump(); }

GenSpec gen_spec_from_json(const std::string& text) {
  GenSpec s = gen_spec_from(parse(text));
  s.validate();
  return s;
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw InvalidArgument("experiment config must be a JSON object");
  ExperimentConfig c;
  c.scenario = scenario_from_string(get_or<std::string>(j, "scenario", "static_linear"));
  if (j.contains("gen")) c.gen = gen_spec_from(j["gen"]);
  if (j.contains("fractions")) c.fractions = get_or<std::vector<double>>(j, "fractions", {});
  c.trials = get_or<int>(j, "trials", c.trials);
  c.recovery_tol = get_or<double>(j, "recovery_tol", c.recovery_tol);
  if (j.contains("lambda") && !j["lambda"].is_null()) c.lambda = get_or<double>(j, "lambda", 0.0);
  if (j.contains("r_max") && !j["r_max"].is_null()) c.r_max = get_or<int>(j, "r_max", 0);
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (j.contains("sample_sizes")) c.sample_sizes = get_or<std::vector<Index>>(j, "sample_sizes", {});
  c.outputs_dim = get_or<Index>(j, "outputs_dim", 1);
  c.threads = get_or<int>(j, "threads", 1);
  c.validate();
  return c;
}

Vector theta_from_json(const std::string& text) {
  const json j = parse(text);
  if (j.is_array()) return vec_from(j, "theta");
  if (j.is_object() && j.contains("theta")) return vec_from(j["theta"], "theta");
  throw InvalidArgument("expected a JSON array or an object with a 'theta' field");
}

}  // namespace robl1::json
