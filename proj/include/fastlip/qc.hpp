#pragma once

#include "fastlip/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fastlip {

enum class ConditionTag { Q1, Q2, QInf, Q2Delta, QInfDelta, Qk, OldI, OldII, OldIII };

/// Identifier for a qualifying condition. Qk carries its order k
/// (1..kMaxPowerK, or kInfiniteK for the series-limit case).
struct ConditionId {
  ConditionTag tag = ConditionTag::Q1;
  int k = 1; // meaningful for Qk only

  static ConditionId q1() { return {ConditionTag::Q1, 1}; }
  static ConditionId q2() { return {ConditionTag::Q2, 2}; }
  static ConditionId qinf() { return {ConditionTag::QInf, kInfiniteK}; }
  static ConditionId q2d() { return {ConditionTag::Q2Delta, 2}; }
  static ConditionId qinfd() { return {ConditionTag::QInfDelta, kInfiniteK}; }
  static ConditionId qk(int k);
  static ConditionId old1() { return {ConditionTag::OldI, 1}; }
  static ConditionId old2() { return {ConditionTag::OldII, 2}; }
  static ConditionId old3() { return {ConditionTag::OldIII, kInfiniteK}; }

  /// Accepts q1, q2, qinf, q2d, qinfd, qk:<n>, qk:inf, old1/old_i, ... (case-insensitive).
  static ConditionId parse(const std::string& text);

  std::string name() const;
  bool operator==(const ConditionId& other) const {
    return tag == other.tag && (tag != ConditionTag::Qk || k == other.k);
  }
};

/// All checkable conditions, in implication-audit order.
std::vector<ConditionId> special_conditions();

/// Sampling descriptor kept alongside every report: these are sampled
/// certificates, evidence over a finite grid rather than proofs over D.
struct GridSpec {
  int dims = 0;
  int per_axis = 0; // 0 for Monte-Carlo-only grids
  long lattice_points = 0;
  int mc_points = 0;
  std::uint64_t seed = 0;

  long total() const { return lattice_points + mc_points; }
  std::string describe() const;
};

struct Grid {
  GridSpec spec;
  std::vector<Vec> points;
};

inline constexpr long kLatticeBudget = 1'000'000;

/// Uniform lattice with per_axis points per axis (box corners included),
/// optionally topped up with seeded Monte Carlo points.
Grid sample_grid(const BoundingBox& box, int per_axis, int mc_extra = 0,
                 std::uint64_t seed = 0);

/// Seeded uniform samples only (for dimensions where a lattice is infeasible).
Grid monte_carlo_grid(const BoundingBox& box, int count, std::uint64_t seed);

/// 33 points per axis up to 4 dims, otherwise 1e5 Monte Carlo points.
Grid default_grid(const BoundingBox& box, std::uint64_t seed = 0);

/// One sub-condition of a qualifying condition, evaluated at one point.
/// margin > 0 means satisfied with room; the comparison direction is folded
/// into the margin so aggregation is uniform.
struct SubConditionEval {
  std::string name;
  double value = 0;
  double bound = 0;
  double margin = 0;
  bool pass = false;
  std::string detail;
};

/// Worst case of one sub-condition over the whole grid.
struct SubConditionResult {
  std::string name;
  double worst_value = 0;
  double bound = 0;
  double margin = 0;
  Vec worst_x;
  bool pass = false;
  std::string detail;
};

struct PointFailure {
  Vec x;
  std::string sub_condition;
};

struct CertificateReport {
  ConditionId condition;
  GridSpec grid;
  bool verdict = false; // pass iff no failures
  std::vector<SubConditionResult> worst_margins;
  std::vector<PointFailure> failures; // capped at kMaxRecordedFailures
  long failure_count = 0;
  bool sampled_certificate = true;
};

inline constexpr size_t kMaxRecordedFailures = 1024;

/// Box-global gradient extremes, needed by OLD_III.
struct GlobalDeltas {
  double delta_bar = 0;
  double Delta_bar = 0;
};

GlobalDeltas global_deltas(const ProblemSpec& problem, const Grid& grid);

/// Sub-condition outcomes for `cond` at a single sample. OLD_III requires the
/// box-global extremes.
std::vector<SubConditionEval> evaluate_condition_at(
    const ConditionSample& sample, const ConditionId& cond,
    const std::optional<GlobalDeltas>& globals = std::nullopt);

/// Evaluates the condition at every grid point and aggregates worst margins.
/// Evaluator failures at a point are recorded as "evaluation-failure" and
/// fail the verdict. Honors FL_THREADS for parallel evaluation; aggregation
/// is an ordered reduction, so reports are schedule-independent.
CertificateReport check_condition(const ProblemSpec& problem, const ConditionId& cond,
                                  const Grid& grid);

struct ImplicationViolation {
  Vec x;
  ConditionId source;
  ConditionId target;
};

struct AuditResult {
  long pairs_checked = 0;
  std::vector<ImplicationViolation> violations;
};

/// The implication chain: every pointwise pass of a special condition must
/// imply a pointwise pass of its general-condition image
///   Q1 -> QK(1), Q2 -> QK(2), QINF -> QK(inf),
///   Q2D -> Q2, QINFD -> QINF, OLD_I -> Q1, OLD_II -> Q2D, OLD_III -> QINFD.
AuditResult implication_audit(const ProblemSpec& problem, const Grid& grid);

/// Audit image of a special condition.
ConditionId implication_target(const ConditionId& source);

} // namespace fastlip
