#pragma once

// Negative gradient flow of f = ||mu||^2 on CP^{n-1}, recorded as a
// trajectory, plus the tail certificates used to argue single-point limits.

#include <string>
#include <vector>

#include "momentflow/moment.hpp"

namespace momentflow {

struct FlowOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double grad_stop = 1e-8;
  double t_max = 1e4;
  int sample_stride = 1;  // record every k-th accepted step

  /// Throws DomainError unless every field is positive and grad_stop >= 1e-12.
  void validate() const;
};

enum class Termination { GradStop, TMax, StepFailure };
std::string to_string(Termination t);

struct FlowSample {
  double t = 0.0;
  ProjectivePoint point;
  double f = 0.0;
  double gradnorm = 0.0;
  double arc = 0.0;  // integral of ||grad f|| from t = 0, integrated with the flow
};

struct Trajectory {
  std::vector<FlowSample> samples;
  std::string setup_id;
  ProjectivePoint seed;
  Termination termination = Termination::GradStop;
  long accepted_steps = 0;
  long rejected_steps = 0;

  const FlowSample& final_sample() const { return samples.back(); }
  double t_end() const { return samples.back().t; }
};

/// Dormand-Prince 5(4) on the ambient sphere, renormalized after every stage
/// and accepted step. Steps that would raise f are rejected, so f is
/// non-increasing along the returned samples.
Trajectory integrate(const ProjectivePoint& p0, const GroupSetup& setup, const FlowOptions& opts,
                     const GradientFn& grad_fn = grad_f);

enum class CertStatus { Pass, Fail, Inconclusive };
std::string to_string(CertStatus s);

struct TailCertificate {
  CertStatus status = CertStatus::Inconclusive;
  double diameter = 0.0;  // max pairwise distance of samples in the window
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
  double diam_tol = 0.0;
};

struct OmegaLimit {
  ProjectivePoint point;
  TailCertificate certificate;
};

/// Final point plus the diameter of the samples with t >= t_end - window.
/// Inconclusive unless the trajectory stopped on grad_stop.
OmegaLimit omega_limit(const Trajectory& traj, double window, double diam_tol);

/// Duration of the last tenth of the integrated time span; the window used
/// for single-point convergence certificates.
double final_tenth_window(const Trajectory& traj);

/// Max pairwise distance among samples with t in [t_lo, t_hi].
double tail_diameter(const Trajectory& traj, double t_lo, double t_hi);

/// Integral of ||grad f|| over [t0, t1], from the arc length carried in the
/// integrator state. Between samples the running integral is interpolated
/// with the logarithmic-mean rule. Throws DomainError if the interval leaves
/// the sample range.
double arc_length(const Trajectory& traj, double t0, double t1);
/// Independent estimate of the same integral from the recorded ||grad f||
/// samples alone (logarithmic-mean rule, exact for exponential decay);
/// |arc_length - this| bounds the quadrature error in certificates.
double arc_length_quadrature(const Trajectory& traj, double t0, double t1);

}  // namespace momentflow
