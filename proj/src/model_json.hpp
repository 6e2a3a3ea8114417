#pragma once

#include "model.hpp"
#include "simulate.hpp"
#include "verify.hpp"

#include <json.hpp>

#include <string>

namespace agv {

/// The canonical interchange unit: one system plus one contract.
struct Model {
  PerturbedLtiSystem system;
  LtiContract contract;
};

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json vector_to_json(const Vector& v);

/// Parses a matrix from nested row arrays.  rows_hint/cols_hint (-1 = free)
/// resolve the shapes of empty matrices; mismatches throw
/// std::invalid_argument naming the field.
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field, int rows_hint = -1,
                        int cols_hint = -1);
Vector vector_from_json(const nlohmann::json& j, const std::string& field, int size_hint = -1);

nlohmann::json perturbation_to_json(const PerturbationSet& set);
PerturbationSet perturbation_from_json(const nlohmann::json& j, const std::string& field,
                                       int dim_hint, const Tolerances& tol);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j, const Tolerances& tol);
Model model_from_string(const std::string& text, const Tolerances& tol);

nlohmann::json report_to_json(const VerificationReport& report);
nlohmann::json monitor_to_json(const MonitorReport& report, const Trajectory& trajectory);
nlohmann::json dimension_report_to_json(const DimensionReport& report);

}  // namespace agv
