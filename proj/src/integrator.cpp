#include "momentflow/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace momentflow {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0;
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0,
                 A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0,
                 A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0;
constexpr double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0,
                 E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0;

// controller constants (Hairer, Norsett & Wanner)
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;   // h_new >= 0.2 h
constexpr double kFacMax = 10.0;  // h_new <= 10 h
constexpr double kBeta = 0.04;

double scaled_norm(const StateVector& e, const StateVector& y0, const StateVector& y1, const StepControl& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double sk = c.abs_tol + c.rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    s += (e(i) / sk) * (e(i) / sk);
  }
  return std::sqrt(s / std::max<Eigen::Index>(1, e.size()));
}

double initial_step(const OdeRhs& rhs, double t0, const StateVector& y0, const StateVector& f0, double span,
                    const StepControl& c) {
  const double d0 = scaled_norm(y0, y0, y0, c);
  const double d1 = scaled_norm(f0, y0, y0, c);
  double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  StateVector y1 = y0 + h0 * f0;
  StateVector f1(y0.size());
  rhs(t0 + h0, y1, f1);
  const double d2 = scaled_norm(f1 - f0, y0, y0, c) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min({100.0 * h0, h1, span, c.h_max});
}

bool step_too_small(double t, double h, const StepControl& c) {
  return h < c.h_min || t + h == t;
}

}  // namespace

IntegrationResult integrate_dopri5(const OdeRhs& rhs, double t0, StateVector y0, double t_end,
                                   const StepControl& ctl, const StepHooks& hooks) {
  IntegrationResult res;
  res.t = t0;
  res.y = std::move(y0);
  if (!(t_end > t0)) return res;

  const Eigen::Index n = res.y.size();
  StateVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ys(n), y_new(n), err(n);
  rhs(res.t, res.y, k1);

  double h = ctl.h_init > 0.0 ? ctl.h_init : initial_step(rhs, res.t, res.y, k1, t_end - t0, ctl);
  double fac_old = 1e-4;
  const double expo1 = 0.2 - kBeta * 0.75;

  while (true) {
    if (res.accepted + res.rejected >= ctl.max_steps) {
      res.status = IntegrationStatus::StepFailure;
      return res;
    }
    h = std::min(h, ctl.h_max);
    bool last = false;
    if (res.t + h >= t_end) {
      h = t_end - res.t;
      last = true;
    }
    if (step_too_small(res.t, h, ctl) && !last) {
      res.status = IntegrationStatus::StepFailure;
      return res;
    }

    const double t = res.t;
    const StateVector& y = res.y;
    ys = y + h * A21 * k1;
    rhs(t + C2 * h, ys, k2);
    ys = y + h * (A31 * k1 + A32 * k2);
    rhs(t + C3 * h, ys, k3);
    ys = y + h * (A41 * k1 + A42 * k2 + A43 * k3);
    rhs(t + C4 * h, ys, k4);
    ys = y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4);
    rhs(t + C5 * h, ys, k5);
    ys = y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
    rhs(t + h, ys, k6);
    y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    rhs(t + h, y_new, k7);
    err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    const double e = scaled_norm(err, y, y_new, ctl);

    const double fac11 = std::pow(std::max(e, 1e-300), expo1);
    if (!std::isfinite(e) || e > 1.0) {
      ++res.rejected;
      const double shrink = std::isfinite(e) ? std::min(1.0 / kFacMin, fac11 / kSafe) : 1.0 / kFacMin;
      h /= shrink;
      if (step_too_small(res.t, h, ctl)) {
        res.status = IntegrationStatus::StepFailure;
        return res;
      }
      continue;
    }

    if (hooks.project) hooks.project(y_new);
    if (hooks.admissible && !hooks.admissible(y, y_new)) {
      ++res.rejected;
      h *= 0.5;
      if (step_too_small(res.t, h, ctl)) {
        res.status = IntegrationStatus::StepFailure;
        return res;
      }
      continue;
    }

    // accepted
    ++res.accepted;
    res.t = last ? t_end : t + h;
    res.y = y_new;
    if (hooks.project) {
      rhs(res.t, res.y, k1);
    } else {
      k1 = k7;
    }
    double fac = fac11 / std::pow(fac_old, kBeta);
    fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
    fac_old = std::max(e, 1e-4);
    h /= fac;
    res.h_next = h;

    if (hooks.observer && !hooks.observer(res.t, res.y)) {
      res.status = IntegrationStatus::Stopped;
      return res;
    }
    if (last) {
      res.status = IntegrationStatus::ReachedEnd;
      return res;
    }
  }
}

IntegrationResult integrate_linearly_implicit(const OdeRhs& rhs, double t0, StateVector y0, double t_end,
                                              const StepControl& ctl, const StepHooks& hooks) {
  IntegrationResult res;
  res.t = t0;
  res.y = std::move(y0);
  if (!(t_end > t0)) return res;
  const Eigen::Index n = res.y.size();

  const auto jacobian = [&](double t, const StateVector& y) {
    Eigen::MatrixXd jac(n, n);
    StateVector fp(n), fm(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double dk = 1e-7 * std::max(1.0, std::abs(y(k)));
      StateVector yp = y, ym = y;
      yp(k) += dk;
      ym(k) -= dk;
      rhs(t, yp, fp);
      rhs(t, ym, fm);
      jac.col(k) = (fp - fm) / (2.0 * dk);
    }
    return jac;
  };
  // one linearly implicit Euler step: (I - h J) dy = h f(y)
  const auto euler = [&](double t, const StateVector& y, double h) {
    StateVector f(n);
    rhs(t, y, f);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - h * jacobian(t, y);
    return StateVector(y + a.partialPivLu().solve(h * f));
  };

  double h = ctl.h_init > 0.0 ? ctl.h_init : std::min(1e-3, t_end - t0);
  while (true) {
    if (res.accepted + res.rejected >= ctl.max_steps) {
      res.status = IntegrationStatus::StepFailure;
      return res;
    }
    h = std::min(h, ctl.h_max);
    bool last = false;
    if (res.t + h >= t_end) {
      h = t_end - res.t;
      last = true;
    }
    if (step_too_small(res.t, h, ctl) && !last) {
      res.status = IntegrationStatus::StepFailure;
      return res;
    }
    const StateVector full = euler(res.t, res.y, h);
    const StateVector half = euler(res.t + 0.5 * h, euler(res.t, res.y, 0.5 * h), 0.5 * h);
    StateVector y_new = 2.0 * half - full;
    const double e = scaled_norm(half - full, res.y, y_new, ctl);
    const double fac = std::clamp(0.9 / std::sqrt(std::max(e, 1e-12)), 0.2, 4.0);
    if (!std::isfinite(e) || e > 1.0 || !y_new.allFinite()) {
      ++res.rejected;
      h *= std::isfinite(e) ? fac : 0.2;
      if (step_too_small(res.t, h, ctl)) {
        res.status = IntegrationStatus::StepFailure;
        return res;
      }
      continue;
    }
    if (hooks.project) hooks.project(y_new);
    if (hooks.admissible && !hooks.admissible(res.y, y_new)) {
      ++res.rejected;
      h *= 0.5;
      if (step_too_small(res.t, h, ctl)) {
        res.status = IntegrationStatus::StepFailure;
        return res;
      }
      continue;
    }
    ++res.accepted;
    res.t = last ? t_end : res.t + h;
    res.y = y_new;
    h *= fac;
    res.h_next = h;
    if (hooks.observer && !hooks.observer(res.t, res.y)) {
      res.status = IntegrationStatus::Stopped;
      return res;
    }
    if (last) {
      res.status = IntegrationStatus::ReachedEnd;
      return res;
    }
  }
}

}  // namespace momentflow
