#pragma once

#include "robl1/bounds.hpp"
#include "robl1/certificates.hpp"
#include "robl1/datamodel.hpp"
#include "robl1/experiments.hpp"
#include "robl1/solvers.hpp"

#include <string>

namespace robl1::json {

/// Single-line form of a JSON document.
std::string compact(const std::string& text);

/// Every document carries "schema_version": 1 and, when non-empty, "invocation".
/// Keys mirror the field names of the serialized type. Infinite reals are written as null.
std::string to_json(const Estimate& est, const std::string& invocation = {});
std::string to_json(const ReweightedResult& res, const std::string& invocation = {});
std::string to_json(const RegularizedSolution& sol, const std::string& invocation = {});
std::string to_json(const MatrixEstimate& est, const std::string& invocation = {});
std::string to_json(const Certificate& cert, const std::string& invocation = {});
std::string to_json(const BoundsReport& rep, const std::string& invocation = {});
std::string to_json(const GenSpec& spec, const std::string& invocation = {});
std::string to_json(const ExperimentConfig& config, const std::string& invocation = {});
std::string to_json(const ResultTable& table, const std::string& invocation = {});

/// Adds `key` (holding the JSON text `value`) to the object `document`.
std::string merge_field(const std::string& document, const std::string& key,
                        const std::string& value);
/// JSON text of a real, null when not finite.
std::string number(double v);

GenSpec gen_spec_from_json(const std::string& text);
ExperimentConfig experiment_config_from_json(const std::string& text);
/// The "theta" array of an estimate document (or a bare JSON array).
Vector theta_from_json(const std::string& text);

}  // namespace robl1::json
