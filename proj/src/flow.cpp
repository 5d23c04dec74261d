#include "momentflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "momentflow/integrator.hpp"

namespace momentflow {

namespace {

// f may rise by at most this much across an accepted step (rounding only).
constexpr double kMonotoneSlack = 1e-13;

StateVector to_state(const CVector& v) {
  StateVector y(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    y(2 * i) = v(i).real();
    y(2 * i + 1) = v(i).imag();
  }
  return y;
}

CVector from_state(const StateVector& y) {
  CVector v(y.size() / 2);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(y(2 * i), y(2 * i + 1));
  return v;
}

double interpolate_gradnorm(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  auto it = std::lower_bound(s.begin(), s.end(), t, [](const FlowSample& a, double x) { return a.t < x; });
  if (it == s.begin()) return it->gradnorm;
  if (it == s.end()) return s.back().gradnorm;
  const auto prev = std::prev(it);
  if (it->t == prev->t) return it->gradnorm;
  const double w = (t - prev->t) / (it->t - prev->t);
  if (prev->gradnorm > 0.0 && it->gradnorm > 0.0) {
    return prev->gradnorm * std::pow(it->gradnorm / prev->gradnorm, w);
  }
  return (1.0 - w) * prev->gradnorm + w * it->gradnorm;
}

// exact integral of the exponential through (0, a) and (1, b): the logarithmic mean
double log_mean(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.5 * (a + b);
  const double q = b / a;
  if (std::abs(q - 1.0) < 1e-6) return 0.5 * (a + b);
  return (a - b) / std::log(a / b);
}

void check_interval(const Trajectory& traj, double t0, double t1) {
  if (traj.samples.empty()) throw DomainError("arc_length: empty trajectory");
  const double lo = traj.samples.front().t, hi = traj.samples.back().t;
  if (t0 > t1 || t0 < lo || t1 > hi) throw DomainError("arc_length: interval outside the sample range");
}

double quadrature(const Trajectory& traj, double t0, double t1) {
  if (t0 == t1) return 0.0;
  std::vector<std::pair<double, double>> nodes;
  nodes.emplace_back(t0, interpolate_gradnorm(traj, t0));
  for (const auto& s : traj.samples) {
    if (s.t > t0 && s.t < t1) nodes.emplace_back(s.t, s.gradnorm);
  }
  nodes.emplace_back(t1, interpolate_gradnorm(traj, t1));
  double sum = 0.0;
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    sum += (nodes[k].first - nodes[k - 1].first) * log_mean(nodes[k - 1].second, nodes[k].second);
  }
  return sum;
}

// running arc length at t
double arc_at(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  auto it = std::lower_bound(s.begin(), s.end(), t, [](const FlowSample& a, double x) { return a.t < x; });
  if (it == s.end()) return s.back().arc;
  if (it->t == t || it == s.begin()) return it->arc;
  const auto prev = std::prev(it);
  const double whole = quadrature(traj, prev->t, it->t);
  const double part = quadrature(traj, prev->t, t);
  const double w = whole > 0.0 ? part / whole : (t - prev->t) / (it->t - prev->t);
  return prev->arc + w * (it->arc - prev->arc);
}

}  // namespace

void FlowOptions::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(t_max > 0.0) || sample_stride < 1) {
    throw DomainError("flow options: tolerances, t_max and sample_stride must be positive");
  }
  if (!(grad_stop >= 1e-12)) throw DomainError("flow options: grad_stop must be at least 1e-12");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::GradStop: return "grad_stop";
    case Termination::TMax: return "t_max";
    case Termination::StepFailure: return "step_failure";
  }
  return "unknown";
}

std::string to_string(CertStatus s) {
  switch (s) {
    case CertStatus::Pass: return "pass";
    case CertStatus::Fail: return "fail";
    case CertStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

Trajectory integrate(const ProjectivePoint& p0, const GroupSetup& setup, const FlowOptions& opts,
                     const GradientFn& grad_fn) {
  opts.validate();
  if (p0.dim() != setup.n()) throw DomainError("integrate: seed dimension does not match setup");

  Trajectory traj;
  traj.setup_id = setup.id();
  traj.seed = p0;

  const auto sample_at = [&](double t, const ProjectivePoint& p, double arc) {
    return FlowSample{t, p, f_value(p, setup), grad_fn(p, setup).norm(), arc};
  };
  traj.samples.push_back(sample_at(0.0, p0, 0.0));
  if (traj.samples.back().gradnorm < opts.grad_stop) {
    traj.termination = Termination::GradStop;
    return traj;
  }

  // state: interleaved (re, im) of v, then the running arc length
  const Eigen::Index m = 2 * setup.n();
  const OdeRhs rhs = [&](double, const StateVector& y, StateVector& dy) {
    const ProjectivePoint p(from_state(y.head(m)));
    const TangentVector g = grad_fn(p, setup);
    dy.resize(m + 1);
    dy.head(m) = to_state(-g.dir);
    dy(m) = g.norm();
  };

  StepControl ctl;
  ctl.rel_tol = opts.rel_tol;
  ctl.abs_tol = opts.abs_tol;

  double f_last = traj.samples.back().f;
  FlowSample pending;
  bool have_pending = false;
  long step = 0;
  bool hit_grad_stop = false;

  StepHooks hooks;
  hooks.project = [m](StateVector& y) { y.head(m) /= y.head(m).norm(); };
  hooks.admissible = [&](const StateVector&, const StateVector& y_new) {
    const double f_new = f_value(ProjectivePoint(from_state(y_new.head(m))), setup);
    return f_new <= f_last + kMonotoneSlack;
  };
  hooks.observer = [&](double t, const StateVector& y) {
    FlowSample s = sample_at(t, ProjectivePoint(from_state(y.head(m))), y(m));
    f_last = s.f;
    ++step;
    hit_grad_stop = s.gradnorm < opts.grad_stop;
    if (step % opts.sample_stride == 0 || hit_grad_stop) {
      traj.samples.push_back(std::move(s));
      have_pending = false;
    } else {
      pending = std::move(s);
      have_pending = true;
    }
    return !hit_grad_stop;
  };

  StateVector y0(m + 1);
  y0.head(m) = to_state(p0.rep());
  y0(m) = 0.0;
  const IntegrationResult res = integrate_dopri5(rhs, 0.0, y0, opts.t_max, ctl, hooks);
  if (have_pending) traj.samples.push_back(std::move(pending));
  traj.accepted_steps = res.accepted;
  traj.rejected_steps = res.rejected;
  if (hit_grad_stop) {
    traj.termination = Termination::GradStop;
  } else if (res.status == IntegrationStatus::ReachedEnd) {
    traj.termination = Termination::TMax;
  } else {
    traj.termination = Termination::StepFailure;
  }
  return traj;
}

double tail_diameter(const Trajectory& traj, double t_lo, double t_hi) {
  std::vector<const ProjectivePoint*> pts;
  for (const auto& s : traj.samples) {
    if (s.t >= t_lo && s.t <= t_hi) pts.push_back(&s.point);
  }
  double diam = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, distance(*pts[i], *pts[j]));
  }
  return diam;
}

OmegaLimit omega_limit(const Trajectory& traj, double window, double diam_tol) {
  if (traj.samples.empty()) throw DomainError("omega_limit: empty trajectory");
  OmegaLimit out;
  out.point = traj.final_sample().point;
  auto& cert = out.certificate;
  cert.t_hi = traj.t_end();
  cert.t_lo = std::max(traj.samples.front().t, cert.t_hi - window);
  cert.diam_tol = diam_tol;
  cert.diameter = tail_diameter(traj, cert.t_lo, cert.t_hi);
  cert.samples = static_cast<std::size_t>(std::count_if(traj.samples.begin(), traj.samples.end(), [&](const FlowSample& s) {
    return s.t >= cert.t_lo;
  }));
  if (traj.termination != Termination::GradStop) {
    cert.status = CertStatus::Inconclusive;
  } else {
    cert.status = cert.diameter <= diam_tol ? CertStatus::Pass : CertStatus::Fail;
  }
  return out;
}

double final_tenth_window(const Trajectory& traj) {
  return 0.1 * (traj.t_end() - traj.samples.front().t);
}

double arc_length(const Trajectory& traj, double t0, double t1) {
  check_interval(traj, t0, t1);
  if (t0 == t1) return 0.0;
  return arc_at(traj, t1) - arc_at(traj, t0);
}

double arc_length_quadrature(const Trajectory& traj, double t0, double t1) {
  check_interval(traj, t0, t1);
  return quadrature(traj, t0, t1);
}

}  // namespace momentflow
