#pragma once

// Smooth, non-analytic function on the plane (polar coordinates)
//
//   f(r, theta) = exp(1 / (r^2 - 1))                              r < 1
//               = 0                                               r = 1
//               = exp(-1 / (r^2 - 1)) sin(1 / (r - 1) - theta)   r > 1
//
// whose gradient flow has trajectories spiralling onto the whole unit circle.

#include <string>
#include <vector>

#include "momentflow/flow.hpp"

namespace momentflow {

struct PlanePoint {
  double r = 0.0;
  double theta = 0.0;  // unwrapped
};

double pdm_value(const PlanePoint& p);

/// Euclidean gradient in the polar frame: (d/dr f, (1/r) d/dtheta f).
struct PlaneGradient {
  double dr = 0.0;
  double dtheta = 0.0;
  bool flat = false;  // r == 1 exactly; returned as 0
  double norm() const;
};

PlaneGradient pdm_grad(const PlanePoint& p);

struct PlaneSample {
  double t = 0.0;
  double r = 0.0;
  double theta = 0.0;
  double f = 0.0;
  double gradnorm = 0.0;
};

enum class PlaneStop { FlatStop, TMax, StepFailure, ExitRadius };
std::string to_string(PlaneStop s);

struct PlaneTrajectory {
  std::vector<PlaneSample> samples;
  PlaneStop stop = PlaneStop::TMax;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

struct Flow2dOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  double h_max = 1.0;
  double t_max = 1e7;
  double df_stop = 1e-16;  // stop when |delta f| / delta t falls below this
};

/// Negative gradient flow (Dormand-Prince). Throws DomainError unless r > 0.
PlaneTrajectory flow2d(const PlanePoint& p0, const Flow2dOptions& opts = {});

struct WindingReport {
  CertStatus status = CertStatus::Inconclusive;  // Pass = witness found
  double band = 0.0;
  double total = 0.0;  // sum of |delta theta| between consecutive in-band samples
  double r_min = 0.0;  // excursion of r - 1 over in-band samples
  double r_max = 0.0;
  bool monotone = false;  // |r - 1| non-increasing over the in-band samples
  std::size_t band_samples = 0;
};

inline constexpr double kWitnessWinding = 4.0 * 3.14159265358979323846;

/// Angular travel between consecutive samples with r - 1 < band (signed, so
/// inside points count and contribute nothing). Pass iff total >= 4 pi with
/// |r - 1| non-increasing over the band samples.
WindingReport winding(const PlaneTrajectory& traj, double band);

/// Exact Euclidean diameter of a planar point set (convex hull first).
double plane_diameter(const std::vector<PlaneSample>& pts);

/// Diameter of the samples with t in [t_lo, t_hi].
double plane_tail_diameter(const PlaneTrajectory& traj, double t_lo, double t_hi);

struct PlaneTailCertificate {
  CertStatus status = CertStatus::Inconclusive;
  double diameter = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double diam_tol = 0.0;
};

/// Single-point convergence certificate over [t_end - window, t_end].
PlaneTailCertificate plane_tail_certificate(const PlaneTrajectory& traj, double window, double diam_tol);

struct WitnessSearchOptions {
  double band = 1e-2;
  double exit_radius = 1.05;  // seeds lie just beyond this radius
  int theta_cells = 8;
  int offset_cells = 3;
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  long max_steps = 2'000'000;
};

struct WitnessCandidate {
  int cell = 0;
  PlanePoint start;  // near-circle end of the trajectory
  PlanePoint seed;   // outer end: the descent starts here
  // descent, time measured from the seed; near the circle t is rounded to
  // the total time
  PlaneTrajectory trajectory;
  WindingReport winding;
  bool f_monotone = false;
  bool is_witness = false;
};

std::size_t witness_cell_count(const WitnessSearchOptions& opts);

/// One grid cell. The descent trajectory is obtained by integrating the
/// ascent +grad f from a point just outside the circle (where the inward
/// spiral is attracting) until r reaches exit_radius, then reversing time.
WitnessCandidate witness_candidate(const WitnessSearchOptions& opts, int cell);

struct WitnessReport {
  bool found = false;
  std::size_t index = 0;  // first witness cell
  std::vector<WitnessCandidate> candidates;
  PlaneTailCertificate tail;  // over the in-band part of the witness
};

WitnessReport assemble_witness_report(std::vector<WitnessCandidate> candidates, double band);

}  // namespace momentflow
