#pragma once

// CP^{n-1} as unit vectors in C^n modulo phase. Tangent vectors at [v] are
// horizontal vectors w with (v, w) = 0; the metric is Re(w1* w2), i.e. the
// round-sphere metric on horizontal vectors, whose distance is
// arccos |(u, v)| (Fubini-Study up to a constant).

#include <cstdint>
#include <random>
#include <vector>

#include "momentflow/algebra.hpp"

namespace momentflow {

/// Distances at or below this are treated as the same point.
inline constexpr double kPointTolerance = 1e-8;

/// String naming the metric convention, written into reports.
inline constexpr const char* kMetricConvention =
    "round-sphere metric on horizontal vectors; d = arccos|<u,v>| in [0, pi/2]";

class ProjectivePoint {
 public:
  ProjectivePoint() = default;
  /// Normalizes `v`. Throws DomainError for the zero vector or n < 1.
  explicit ProjectivePoint(const CVector& v);

  /// Coordinate line [e_i] in CP^{n-1}.
  static ProjectivePoint basis_point(int n, int i);
  /// Parses 2n interleaved (re, im) reals.
  static ProjectivePoint from_interleaved(const std::vector<double>& flat);

  const CVector& rep() const { return rep_; }
  int dim() const { return static_cast<int>(rep_.size()); }

  /// Representative whose largest-modulus coordinate is real positive.
  CVector canonical_rep() const;
  /// 2n interleaved (re, im) reals of the canonical representative.
  std::vector<double> interleaved() const;

 private:
  CVector rep_;
};

struct TangentVector {
  ProjectivePoint base;
  CVector dir;

  double norm() const { return dir.norm(); }
};

/// Real part of the Hermitian product; the metric on horizontal vectors.
double metric(const TangentVector& a, const TangentVector& b);

TangentVector horizontal_project(const ProjectivePoint& base, const CVector& w);

/// arccos(min(1, |(u, v)|)), in [0, pi/2].
double distance(const ProjectivePoint& p, const ProjectivePoint& q);

bool same_point(const ProjectivePoint& p, const ProjectivePoint& q, double tol = kPointTolerance);

/// normalize(rep + t * dir).
ProjectivePoint retract(const ProjectivePoint& p, double t, const TangentVector& w);

/// Point at distance `angle` from p along the geodesic with initial unit
/// direction w / |w|. Used for sampling, not for integration.
ProjectivePoint geodesic(const ProjectivePoint& p, double angle, const TangentVector& w);

/// Geodesic midpoint of p and q (q's phase aligned to p first).
ProjectivePoint midpoint(const ProjectivePoint& p, const ProjectivePoint& q);

/// Multiplication by i on horizontal vectors.
TangentVector complex_structure(const TangentVector& w);

/// [g v] for a matrix g (unitary for isometries, any invertible g otherwise).
ProjectivePoint act(const CMatrix& g, const ProjectivePoint& p);

/// 2n independent standard Gaussians as n complex entries, normalized.
CVector gaussian_vector(int n, std::mt19937_64& rng);
ProjectivePoint random_point(int n, std::mt19937_64& rng);
/// Deterministic per (n, seed). Throws DomainError for n < 2.
ProjectivePoint random_point(int n, std::uint64_t seed);

/// Uniformly distributed unit horizontal direction at p.
TangentVector random_tangent(const ProjectivePoint& p, std::mt19937_64& rng);

}  // namespace momentflow
