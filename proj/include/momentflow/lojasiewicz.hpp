#pragma once

// Empirical Lojasiewicz data along a converged trajectory:
//
//   ||grad f(y)|| >= c |f(y) - b|^alpha,               0 < alpha < 1
//   c' ((f(t0) - b)^(1-alpha) - (f(t1) - b)^(1-alpha)) >= int_t0^t1 ||grad f||
//   d(phi_t(y), phi_inf(y)) <= c' (f(phi_t(y)) - b)^(1-alpha)
//
// with c' = 1 / ((1 - alpha) c). Each inequality is checked as a certificate
// against recorded samples; none of them is assumed.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "momentflow/flow.hpp"

namespace momentflow {

/// Raised when a trajectory cannot support a fit ("insufficient tail", ...).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LojaOptions {
  double tail_fraction = 0.5;
  int min_samples = 10;
  double min_decades = 2.0;  // required span of log10(f - b) over the window
  double f_floor = 1e-14;    // samples with f - b below this are dropped
  std::optional<double> fixed_alpha;  // fit c only, with this exponent
  std::optional<double> fixed_b;      // skip limit-value extrapolation
};

struct LojaFit {
  double alpha = 0.0;
  double c = 0.0;
  double c_prime = 0.0;
  double b = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual = 0.0;  // max deviation from the least-squares line (natural log)
  int samples = 0;
  bool flagged = false;  // slope outside (0.05, 0.95)
};

/// Limit value of f, extrapolated from the tail with the energy identity
/// f(t_end) - b = int_{t_end}^inf ||grad f||^2 and the local decay rate of
/// ||grad f|| at the end.
double estimate_limit_value(const Trajectory& traj);

/// Least-squares slope of log ||grad f|| against log (f - b) over the tail,
/// then the largest c with ||grad f|| >= c (f - b)^alpha on every window
/// sample. Throws FitError on unconverged or too-short tails.
LojaFit fit_exponent(const Trajectory& traj, const LojaOptions& opts = {});

// Samples with |f - b| <= kOnLevelTol count as lying on the level (0 >= 0).
// Violations are counted against the fitted c. When there are any, c is
// lowered to the empirical infimum (`lowered`); the certificate fails only if
// that infimum vanishes.
inline constexpr double kOnLevelTol = 1e-14;
struct GradientInequalityCertificate {
  CertStatus status = CertStatus::Inconclusive;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  double c_fit = 0.0;
  double c_empirical = 0.0;  // inf of ||grad f|| / |f - b|^alpha over samples; inf if none off level b
  double c_reported = 0.0;   // min(c_fit, c_empirical)
  bool lowered = false;
};

GradientInequalityCertificate verify_gradient_inequality(const GroupSetup& setup, const LojaFit& fit,
                                                         const std::vector<ProjectivePoint>& region_samples);

/// The same inequality on the fit window's own samples.
GradientInequalityCertificate verify_gradient_inequality(const Trajectory& traj, const LojaFit& fit);

/// Random points with |f - b| < radius (rejection sampling).
std::vector<ProjectivePoint> sample_level_region(const GroupSetup& setup, double b, double radius,
                                                 std::size_t count, std::uint64_t seed);

/// Half the distance from b to the nearest other value in `critical_values`.
double default_region_radius(double b, const std::vector<double>& critical_values);

struct LengthBoundCertificate {
  CertStatus status = CertStatus::Inconclusive;
  double lhs = 0.0;  // c' * difference of (f - b)^(1 - alpha)
  double rhs = 0.0;  // integral of ||grad f||
  double slack = 0.0;
  double quad_tol = 0.0;
};

/// Throws DomainError if [t0, t1] is not inside the fit window.
LengthBoundCertificate verify_length_bound(const Trajectory& traj, const LojaFit& fit, double t0, double t1);

struct WindowCertificate {
  CertStatus status = CertStatus::Inconclusive;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // min slack (length bound) or max violation (distance bound)
};

/// Length bound on [t_i, t_hi] for every window sample t_i.
WindowCertificate verify_length_bound_window(const Trajectory& traj, const LojaFit& fit);

/// d(point, limit) <= c' (f - b)^(1-alpha) + diam_tol on every window sample.
/// Inconclusive when the limit's tail certificate is inconclusive.
WindowCertificate verify_distance_bound(const Trajectory& traj, const LojaFit& fit, const OmegaLimit& limit,
                                        double diam_tol = kPointTolerance);

struct ProbeOptions {
  FlowOptions flow;
  LojaOptions loja;
  double delta_max = 0.5;
  int probes_per_delta = 24;
  int mc_probes = 100;
  int bisection_steps = 8;
  double delta_floor = 1e-12;
  std::uint64_t seed = 7;
};

struct ProbeResult {
  bool found = false;
  double delta = 0.0;
  double eps = 0.0;
  double t_star = 0.0;  // time with c'(f - b)^(1-alpha) < eps/4
  double tail_bound = 0.0;
  double mc_max_distance = 0.0;  // max d(phi_inf(x), phi_inf(y)) over the Monte-Carlo probes
  int mc_probes = 0;
  int mc_failures = 0;
  std::vector<std::string> diagnostics;
};

/// Constructs delta for the continuity of phi_inf at x: picks t with
/// c'(f(phi_t x) - b)^(1-alpha) < eps/4, shrinks delta until sampled y with
/// d(x, y) < delta keep d(phi_t x, phi_t y) < eps/4 and
/// c'|(f(phi_t x) - b)^(1-alpha) - (f(phi_t y) - b)^(1-alpha)| < eps/4, and
/// finally checks d(phi_inf x, phi_inf y) < eps on fresh probes at that
/// delta. `found` requires every probe to pass; failures are not retried at a
/// smaller delta.
ProbeResult continuity_probe(const GroupSetup& setup, const ProjectivePoint& x, double eps,
                             const ProbeOptions& opts = {});

}  // namespace momentflow
