#pragma once

// JSON encodings used by the CLI and the file formats.
//
// Matrices appear in two interchangeable forms on input: a bare row-major
// nested array [[...], ...] or an object {"dim": n, "data": [[...], ...]}.
// Composite objects always embed the bare nested-array form.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "conservafuse/errors.hpp"
#include "conservafuse/estimate.hpp"
#include "conservafuse/fusion.hpp"
#include "conservafuse/minimal_volume.hpp"
#include "conservafuse/tolerances.hpp"

namespace conservafuse {

using nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  const json* rows = &j;
  if (j.is_object()) {
    if (!j.contains("data")) raise(errc::invalid_input, "matrix object must carry a 'data' field");
    rows = &j.at("data");
  }
  if (!rows->is_array() || rows->empty() || !rows->front().is_array()) {
    raise(errc::invalid_input, "matrix must be a non-empty nested array");
  }
  const auto nrows = static_cast<Eigen::Index>(rows->size());
  const auto ncols = static_cast<Eigen::Index>(rows->front().size());
  Eigen::MatrixXd m(nrows, ncols);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const json& row = (*rows)[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != ncols) {
      raise(errc::invalid_input, "matrix rows have inconsistent lengths");
    }
    for (Eigen::Index jcol = 0; jcol < ncols; ++jcol) {
      const json& cell = row[static_cast<std::size_t>(jcol)];
      if (!cell.is_number()) raise(errc::invalid_input, "matrix entries must be numbers");
      m(i, jcol) = cell.get<double>();
    }
  }
  if (j.is_object() && j.contains("dim") &&
      j.at("dim").get<Eigen::Index>() != nrows) {
    raise(errc::invalid_input, "matrix 'dim' field disagrees with 'data' shape");
  }
  return m;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) raise(errc::invalid_input, "vector must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const json& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number()) raise(errc::invalid_input, "vector entries must be numbers");
    v(i) = cell.get<double>();
  }
  return v;
}

// {"mean": [...], "P": [[...]], "Q": [[...]]}; mean is optional.
inline SplitEstimate split_estimate_from_json(const json& j, const Tolerances& tol = {}) {
  if (!j.is_object() || !j.contains("P") || !j.contains("Q")) {
    raise(errc::invalid_input, "split estimate needs 'P' and 'Q' fields");
  }
  std::optional<Eigen::VectorXd> mean;
  if (j.contains("mean") && !j.at("mean").is_null()) mean = vector_from_json(j.at("mean"));
  return SplitEstimate::from_raw(matrix_from_json(j.at("P")), matrix_from_json(j.at("Q")),
                                 std::move(mean), tol);
}

inline json split_estimate_to_json(const SplitEstimate& est) {
  json j;
  if (est.mean()) j["mean"] = vector_to_json(*est.mean());
  j["P"] = matrix_to_json(est.p().data());
  j["Q"] = matrix_to_json(est.q().data());
  return j;
}

inline json fusion_result_to_json(const FusionResult& r) {
  json j;
  j["bound"] = matrix_to_json(r.bound.data());
  j["K_A"] = matrix_to_json(r.gains.k_a);
  j["K_B"] = matrix_to_json(r.gains.k_b);
  if (r.parameter.omega) j["omega"] = *r.parameter.omega;
  if (r.parameter.rho) j["rho"] = *r.parameter.rho;
  if (r.parameter.gamma) j["gamma"] = *r.parameter.gamma;
  if (r.mean) j["mean"] = vector_to_json(*r.mean);
  return j;
}

// {"P_AB": [[...]], "omega": optional}
inline json cross_cov_to_json(const CrossCovariance& cc,
                              std::optional<double> omega = std::nullopt) {
  json j;
  j["P_AB"] = matrix_to_json(cc.matrix);
  if (omega) j["omega"] = *omega;
  return j;
}

inline CrossCovariance cross_cov_from_json(const json& j) {
  if (!j.is_object() || !j.contains("P_AB")) {
    raise(errc::invalid_input, "cross-covariance needs a 'P_AB' field");
  }
  CrossCovariance out;
  out.matrix = matrix_from_json(j.at("P_AB"));
  return out;
}

// {"x": [...], "case": 3, "omega0": 0.5, "g": 0.6667}
inline json direction_analysis_to_json(const DirectionAnalysis& d) {
  json j;
  j["x"] = vector_to_json(d.x);
  j["case"] = d.case_tag;
  j["omega0"] = d.omega0;
  j["g"] = d.g_value;
  j["P_AB"] = matrix_to_json(d.worst_case.matrix);
  return j;
}

// Batch problem description: two estimates, an optional correlation bound rho,
// and an optional list of candidate cross-covariances.
struct ProblemFile {
  SplitEstimate est_a;
  SplitEstimate est_b;
  std::optional<double> rho;
  std::vector<Eigen::MatrixXd> cross_candidates;
};

inline ProblemFile problem_from_json(const json& j, const Tolerances& tol = {}) {
  if (!j.is_object() || !j.contains("estA") || !j.contains("estB")) {
    raise(errc::invalid_input, "problem file needs 'estA' and 'estB'");
  }
  ProblemFile out{split_estimate_from_json(j.at("estA"), tol),
                  split_estimate_from_json(j.at("estB"), tol),
                  std::nullopt,
                  {}};
  if (out.est_a.dim() != out.est_b.dim()) {
    raise(errc::dimension_mismatch, "estA and estB have different dimensions");
  }
  if (j.contains("rho") && !j.at("rho").is_null()) out.rho = j.at("rho").get<double>();
  if (j.contains("P_AB") && !j.at("P_AB").is_null()) {
    const json& p = j.at("P_AB");
    if (!p.is_array() || p.empty()) raise(errc::invalid_input, "'P_AB' must be a non-empty array");
    if (p.front().is_array() && !p.front().empty() && p.front().front().is_array()) {
      for (const json& entry : p) out.cross_candidates.push_back(matrix_from_json(entry));
    } else {
      out.cross_candidates.push_back(matrix_from_json(p));
    }
  }
  return out;
}

}  // namespace conservafuse
