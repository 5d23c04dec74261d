#pragma once

// Critical components of f from sampled flow limits, stable-set membership of
// seeds, and a combinatorial oracle for torus actions: the min-norm point of
// the hull of the (orthonormalized) weights on a support set predicts the
// critical value reached from seeds with that support.

#include <optional>
#include <string>
#include <vector>

#include "momentflow/flow.hpp"

namespace momentflow {

struct StrataOptions {
  double theta_merge = 1e-3;
  double value_tol = 1e-6;
  // Components with equal b whose limits are joined by a chain of critical
  // points (found by flowing geodesic midpoints) are merged.
  bool link_critical_paths = true;
  int link_depth = 16;
  long link_budget = 1 << 14;  // flows per link attempt
  FlowOptions flow;
};

struct LimitRecord {
  ProjectivePoint point;
  double f = 0.0;
};

struct CriticalComponent {
  int id = 0;
  double b = 0.0;
  std::vector<ProjectivePoint> members;
  std::vector<std::size_t> sources;  // indices into the clustered input
  double diameter = 0.0;
  bool provisional = false;  // created by assign_stratum
};

/// A pair of limits within theta_merge whose values differ by more than
/// value_tol. Never merged.
struct ClusterFlag {
  std::size_t i = 0;
  std::size_t j = 0;
  double distance = 0.0;
  double value_gap = 0.0;
};

struct Clustering {
  std::vector<CriticalComponent> components;  // sorted by b, ids 0..k-1
  std::vector<int> label;                     // component id per input
  std::vector<ClusterFlag> flags;
};

Clustering cluster_components(const GroupSetup& setup, const std::vector<LimitRecord>& limits,
                              const StrataOptions& opts = {});

/// True if a and b (both critical at level b) are joined by a chain of
/// critical points at level b with consecutive gaps <= theta_merge.
bool link_critical(const GroupSetup& setup, const ProjectivePoint& a, const ProjectivePoint& b, double level,
                   const StrataOptions& opts);

/// Id of the component containing the limit of `traj`; appends a provisional
/// component when none matches. Throws DomainError unless traj stopped on
/// grad_stop.
int assign_stratum(const GroupSetup& setup, const Trajectory& traj, std::vector<CriticalComponent>& components,
                   const StrataOptions& opts = {});

inline constexpr double kSupportThreshold = 1e-10;
inline constexpr std::size_t kOracleMaxSupport = 20;
inline constexpr double kSemistableTol = 1e-16;

/// Columns G^{-1/2} w_i of the weight matrix (d x n), G = W W^T. Throws
/// DomainError for non-torus setups.
Eigen::MatrixXd orthonormal_weights(const GroupSetup& setup);

struct OracleResult {
  RVector beta;
  double value = 0.0;
  std::vector<int> face;  // indices whose relative interior holds beta
};

/// Exact min-norm point of conv{w_i : i in support} by enumeration of affinely
/// independent subsets. Indices are 0-based. Throws DomainError for an empty
/// support, out-of-range indices or more than kOracleMaxSupport indices.
OracleResult torus_min_norm_oracle(const GroupSetup& setup, const std::vector<int>& support);

/// Oracle values over every nonempty support; contains every critical value
/// of f for the torus. Throws DomainError for n > 12.
std::vector<double> torus_critical_values(const GroupSetup& setup);

std::vector<int> support_of(const ProjectivePoint& p, double threshold = kSupportThreshold);

/// 0 in the hull of the weights on the support of p.
bool semistable(const GroupSetup& setup, const ProjectivePoint& p);

struct OracleCheck {
  std::size_t seed_index = 0;
  std::vector<int> support;
  double limit_f = 0.0;
  double oracle_value = 0.0;
  bool semistable = false;
  bool value_ok = false;
  bool semistability_ok = false;
  // a support coordinate in (threshold, 1e-6]: flow may not resolve it
  bool weak_support = false;
  std::string termination;
};

struct OracleComparison {
  std::vector<OracleCheck> checks;
  std::size_t failures = 0;  // asserted checks that failed
  double max_value_error = 0.0;
  bool pass() const { return failures == 0; }
};

inline constexpr double kOracleValueTol = 1e-5;
inline constexpr double kZeroLevelTol = 1e-8;

/// Flows every seed and compares limit values with the oracle on the seed's
/// support. Unconverged seeds count as failures.
OracleComparison compare_flow_vs_oracle(const GroupSetup& setup, const std::vector<ProjectivePoint>& seeds,
                                        const std::vector<Trajectory>& flows);

}  // namespace momentflow
