#include "fastlip/problem_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace fastlip::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw InvalidInput("problem file: field '" + field + "': " + why);
}

Mat parse_matrix(const json& doc, const std::string& field, int rows, int cols) {
  if (!doc.contains(field)) fail(field, "missing");
  const json& arr = doc.at(field);
  if (!arr.is_array() || static_cast<int>(arr.size()) != rows) {
    fail(field, "expected " + std::to_string(rows) + " rows");
  }
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = arr.at(static_cast<size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      fail(field, "row " + std::to_string(i) + ": expected " + std::to_string(cols) +
                      " entries");
    }
    for (int j = 0; j < cols; ++j) {
      const json& v = row.at(static_cast<size_t>(j));
      if (!v.is_number()) fail(field, "row " + std::to_string(i) + ": non-numeric entry");
      M(i, j) = v.get<double>();
    }
  }
  return M;
}

Vec parse_vector(const json& doc, const std::string& field, int size) {
  if (!doc.contains(field)) fail(field, "missing");
  const json& arr = doc.at(field);
  if (!arr.is_array() || static_cast<int>(arr.size()) != size) {
    fail(field, "expected " + std::to_string(size) + " entries");
  }
  Vec v(size);
  for (int i = 0; i < size; ++i) {
    const json& e = arr.at(static_cast<size_t>(i));
    if (!e.is_number()) fail(field, "entry " + std::to_string(i) + ": non-numeric");
    v[i] = e.get<double>();
  }
  return v;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

} // namespace

ProblemSpec problem_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidInput("problem file: top level must be an object");
  if (!doc.contains("n") || !doc.at("n").is_number_integer()) fail("n", "missing or not an integer");
  if (!doc.contains("m") || !doc.at("m").is_number_integer()) fail("m", "missing or not an integer");
  const int n = doc.at("n").get<int>();
  const int m = doc.at("m").get<int>();
  if (n < 1) fail("n", "must be >= 1");
  if (m < 1) fail("m", "must be >= 1");

  const Mat C = parse_matrix(doc, "objective", n, m);
  const Mat G = parse_matrix(doc, "gain", n, n);
  const Vec eta = parse_vector(doc, "offset", n);

  if (!doc.contains("box") || !doc.at("box").is_object()) fail("box", "missing object");
  const Vec lower = parse_vector(doc.at("box"), "lower", n);
  const Vec upper = parse_vector(doc.at("box"), "upper", n);

  ProblemSpec problem;
  problem.n = n;
  problem.m = m;
  problem.obj = [C](const Vec& x) -> Vec { return C.transpose() * x; };
  problem.obj_grad = [C](const Vec&) { return C; };
  problem.con = [G, eta](const Vec& x) -> Vec { return G * x + eta; };
  const Mat Gt = G.transpose();
  problem.con_grad = [Gt](const Vec&) { return Gt; };
  try {
    problem.box = BoundingBox(lower, upper);
  } catch (const InvalidInput& e) {
    fail("box", e.what());
  }

  std::vector<char> is_eq(static_cast<size_t>(n), 0);
  if (doc.contains("eq")) {
    const json& eq = doc.at("eq");
    if (!eq.is_array()) fail("eq", "expected an array of indices");
    for (const json& e : eq) {
      if (!e.is_number_integer()) fail("eq", "non-integer index");
      const int i = e.get<int>();
      if (i < 0 || i >= n) fail("eq", "index " + std::to_string(i) + " out of range");
      is_eq[static_cast<size_t>(i)] = 1;
      problem.eq_set.push_back(i);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!is_eq[static_cast<size_t>(i)]) problem.ineq_set.push_back(i);
  }
  problem.validate();
  return problem;
}

ProblemSpec load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open problem file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("problem file " + path + ": " + e.what());
  }
  return problem_from_json(doc);
}

json to_json(const GridSpec& grid) {
  return json{{"dims", grid.dims},
              {"per_axis", grid.per_axis},
              {"lattice_points", grid.lattice_points},
              {"mc_points", grid.mc_points},
              {"seed", grid.seed},
              {"total", grid.total()},
              {"describe", grid.describe()}};
}

json to_json(const CertificateReport& report) {
  json margins = json::array();
  for (const SubConditionResult& r : report.worst_margins) {
    json entry{{"name", r.name},
               {"worst_value", r.worst_value},
               {"bound", std::isnan(r.bound) ? json() : json(r.bound)},
               {"margin", std::isnan(r.margin) ? json() : json(r.margin)},
               {"pass", r.pass},
               {"location", vec_to_json(r.worst_x)}};
    if (!r.detail.empty()) entry["detail"] = r.detail;
    margins.push_back(entry);
  }
  json failures = json::array();
  for (const PointFailure& f : report.failures) {
    failures.push_back({{"x", vec_to_json(f.x)}, {"sub_condition", f.sub_condition}});
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"condition", report.condition.name()},
              {"grid", to_json(report.grid)},
              {"verdict", report.verdict ? "pass" : "fail"},
              {"sampled_certificate", report.sampled_certificate},
              {"margins", margins},
              {"failure_count", report.failure_count},
              {"failures", failures}};
}

json to_json(const SolveResult& result) {
  return json{{"xstar", vec_to_json(result.xstar)},
              {"iterations", result.iterations},
              {"converged", result.converged},
              {"final_residual", result.residuals.empty() ? json() : json(result.residuals.back())},
              {"contraction_estimate", result.contraction_estimate},
              {"clamp_events", result.clamp_events}};
}

json to_json(const KktCertificate& cert) {
  return json{{"mu_draws", cert.mu_samples.size()},
              {"min_lambda", cert.min_lambda},
              {"pass", cert.pass()}};
}

json to_json(const FewerConstraintsReport& report) {
  json branches = json::array();
  for (const BranchReport& b : report.branches) {
    json entry{{"name", b.name},
               {"pass", b.pass},
               {"worst_margin", std::isfinite(b.worst_margin) ? json(b.worst_margin) : json()},
               {"location", vec_to_json(b.worst_x)}};
    if (!b.detail.empty()) entry["detail"] = b.detail;
    branches.push_back(entry);
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"check", "fewer_constraints"},
              {"grid", to_json(report.grid)},
              {"verdict", report.verdict ? "pass" : "fail"},
              {"sampled_certificate", true},
              {"branch", report.certified_branch},
              {"subproblem_pass", report.subproblem_pass},
              {"subproblem_condition",
               report.subproblem_pass ? json(report.subproblem_condition.name()) : json()},
              {"z_samples", report.z_samples},
              {"branches", branches}};
}

json to_json(const MissingVarsReport& report) {
  json margins = json::array();
  for (const SubConditionResult& r : report.worst_margins) {
    json entry{{"name", r.name},
               {"worst_value", r.worst_value},
               {"bound", r.bound},
               {"margin", r.margin},
               {"pass", r.pass},
               {"location", vec_to_json(r.worst_x)}};
    if (!r.detail.empty()) entry["detail"] = r.detail;
    margins.push_back(entry);
  }
  json failures = json::array();
  for (const PointFailure& f : report.failures) {
    failures.push_back({{"x", vec_to_json(f.x)}, {"sub_condition", f.sub_condition}});
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"check", "missing_objective_vars"},
              {"grid", to_json(report.grid)},
              {"verdict", report.verdict ? "pass" : "fail"},
              {"sampled_certificate", true},
              {"margins", margins},
              {"failure_count", report.failure_count},
              {"failures", failures}};
}

void write_residual_csv(std::ostream& os, const SolveResult& result) {
  const Eigen::Index n = result.iterates.empty() ? 0 : result.iterates.front().size();
  os << "iter,residual";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x_" << (i + 1);
  os << "\n";
  std::ostringstream line;
  line.precision(17);
  for (size_t k = 0; k < result.residuals.size(); ++k) {
    line.str("");
    line << k << "," << result.residuals[k];
    for (Eigen::Index i = 0; i < n; ++i) line << "," << result.iterates[k][i];
    os << line.str() << "\n";
  }
}

void write_async_trace_csv(std::ostream& os, const AsyncResult& result) {
  os << "step,component,age_vector,value\n";
  std::ostringstream line;
  line.precision(17);
  for (const AsyncEvent& e : result.trace) {
    line.str("");
    line << e.step << "," << e.component << ",\"";
    for (size_t j = 0; j < e.ages.size(); ++j) {
      if (j) line << ";";
      line << e.ages[j];
    }
    line << "\"," << e.value;
    os << line.str() << "\n";
  }
}

} // namespace fastlip::io
