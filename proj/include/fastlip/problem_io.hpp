#pragma once

#include "fastlip/qc.hpp"
#include "fastlip/relax.hpp"
#include "fastlip/solver.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace fastlip::io {

inline constexpr int kReportSchemaVersion = 1;

/// Declarative affine problem file:
/// {
///   "n": 2, "m": 2,
///   "objective": [[..]],        // C = grad f0, n x m, constant
///   "gain": [[..]],             // G with f(x) = G x + offset, n x n
///   "offset": [..],             // n-vector
///   "box": {"lower": [..], "upper": [..]},
///   "eq": [..]                  // optional 0-based equality indices
/// }
/// Nonlinear problems are gallery-only; the file format stays declarative.
ProblemSpec problem_from_json(const nlohmann::json& doc);
ProblemSpec load_problem_file(const std::string& path);

nlohmann::json to_json(const GridSpec& grid);
nlohmann::json to_json(const CertificateReport& report);
nlohmann::json to_json(const SolveResult& result);
nlohmann::json to_json(const KktCertificate& cert);
nlohmann::json to_json(const FewerConstraintsReport& report);
nlohmann::json to_json(const MissingVarsReport& report);

/// Columns: iter,residual,x_1..x_n
void write_residual_csv(std::ostream& os, const SolveResult& result);

/// Columns: step,component,age_vector,value (ages ';'-joined, -1 marks a drop)
void write_async_trace_csv(std::ostream& os, const AsyncResult& result);

} // namespace fastlip::io
