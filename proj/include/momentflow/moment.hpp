#pragma once

// Moment map mu([v]) = project(v v*) of a subgroup of U(n) acting on
// CP^{n-1}, its norm square f, and the Riemannian gradient of f.

#include <cstdint>
#include <functional>

#include "momentflow/algebra.hpp"
#include "momentflow/projective.hpp"

namespace momentflow {

/// Scale between the symplectic form and the metric: sigma(X, Y) =
/// kSymplecticScale * <J X, Y>. With mu = project(v v*) and the round metric
/// this is the normalization under which d<mu, A> = +-sigma(A_M, .).
inline constexpr double kSymplecticScale = 2.0;

struct MomentValue {
  HermitianMatrix H;
  RVector coeffs;  // coordinates in setup.basis()
};

MomentValue moment(const ProjectivePoint& p, const GroupSetup& setup);

/// ||moment(p)||^2 under the trace form.
double f_value(const ProjectivePoint& p, const GroupSetup& setup);

/// 4 (H v - (v* H v) v) with H = moment(p).
TangentVector grad_f(const ProjectivePoint& p, const GroupSetup& setup);

/// Gradient evaluator; the default is grad_f. Test harnesses may substitute
/// a perturbed one to check that the invariant suite notices.
using GradientFn = std::function<TangentVector(const ProjectivePoint&, const GroupSetup&)>;

/// Horizontal part of i A v: the infinitesimal action of X = iA at p.
/// Throws DomainError if A is not in span(setup.basis()) within 1e-10.
TangentVector fundamental_vector(const HermitianMatrix& a, const ProjectivePoint& p,
                                 const GroupSetup& setup);

/// Central difference of `fn` along the sphere curve normalize(v + s w),
/// with w horizontal.
double directional_derivative(const std::function<double(const ProjectivePoint&)>& fn,
                              const ProjectivePoint& p, const CVector& w, double step);

struct DefiningRelationReport {
  double max_residual = 0.0;
  int sign = 0;  // empirically determined s with d<mu,A> = s * sigma(A_M, .)
  int samples = 0;
};

/// Compares d<mu, A>(w) with s * sigma(A_M, w) for random (p, A, w).
DefiningRelationReport check_moment_defining_relation(const GroupSetup& setup, int samples,
                                                      std::uint64_t seed);
/// Same, with the point held fixed.
DefiningRelationReport check_moment_defining_relation(const ProjectivePoint& p, const GroupSetup& setup,
                                                      int samples, std::uint64_t seed);

/// max |moment(g p) - g moment(p) g*| over random group elements and points.
double check_equivariance(const GroupSetup& setup, int samples, std::uint64_t seed);

/// Random element of the identity component of the setup's group.
CMatrix random_group_element(const GroupSetup& setup, std::mt19937_64& rng);

/// Worst relative error between grad_fn and central finite differences of
/// f_value along random horizontal directions, over random points.
double check_gradient(const GroupSetup& setup, int samples, std::uint64_t seed, double step = 1e-5,
                      const GradientFn& grad_fn = grad_f);

}  // namespace momentflow
