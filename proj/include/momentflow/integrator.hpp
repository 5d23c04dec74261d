#pragma once

// Adaptive ODE drivers shared by the projective flow and the planar
// counterexample.

#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace momentflow {

using StateVector = Eigen::VectorXd;
using OdeRhs = std::function<void(double t, const StateVector& y, StateVector& dy)>;

struct StepControl {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double h_init = 0.0;  // 0 selects an initial step automatically
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 20'000'000;
};

struct StepHooks {
  /// Applied to every accepted state (e.g. renormalization onto the sphere).
  std::function<void(StateVector&)> project;
  /// A step is rejected and retried with half the size if this returns false.
  std::function<bool(const StateVector& y_old, const StateVector& y_new)> admissible;
  /// Called after every accepted step; returning false stops the integration.
  std::function<bool(double t, const StateVector& y)> observer;
};

enum class IntegrationStatus { Stopped, ReachedEnd, StepFailure };

struct IntegrationResult {
  IntegrationStatus status = IntegrationStatus::ReachedEnd;
  double t = 0.0;
  StateVector y;
  long accepted = 0;
  long rejected = 0;
  double h_next = 0.0;  // proposed size of the next step
};

/// Dormand-Prince 5(4) with Hairer's PI step-size controller. Integrates from
/// t0 towards t_end, landing exactly on t_end unless stopped earlier.
IntegrationResult integrate_dopri5(const OdeRhs& rhs, double t0, StateVector y0, double t_end,
                                   const StepControl& ctl, const StepHooks& hooks = {});

/// Linearly implicit Euler with step doubling and Richardson extrapolation
/// (second order, L-stable). For stiff problems where the explicit pair is
/// stability-limited. Jacobian by central differences.
IntegrationResult integrate_linearly_implicit(const OdeRhs& rhs, double t0, StateVector y0, double t_end,
                                              const StepControl& ctl, const StepHooks& hooks = {});

}  // namespace momentflow
