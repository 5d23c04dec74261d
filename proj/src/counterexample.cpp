#include "momentflow/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "momentflow/integrator.hpp"

namespace momentflow {

double pdm_value(const PlanePoint& p) {
  const double r = p.r;
  if (r < 1.0) return std::exp(1.0 / (r * r - 1.0));
  if (r == 1.0) return 0.0;
  return std::exp(-1.0 / (r * r - 1.0)) * std::sin(1.0 / (r - 1.0) - p.theta);
}

double PlaneGradient::norm() const { return std::hypot(dr, dtheta); }

PlaneGradient pdm_grad(const PlanePoint& p) {
  PlaneGradient g;
  const double r = p.r;
  if (r == 1.0) {
    g.flat = true;
    return g;
  }
  const double q = r * r - 1.0;
  if (r < 1.0) {
    g.dr = std::exp(1.0 / q) * (-2.0 * r / (q * q));
    return g;
  }
  const double s = r - 1.0;
  const double e = std::exp(-1.0 / q);
  const double psi = 1.0 / s - p.theta;
  g.dr = e * (2.0 * r / (q * q)) * std::sin(psi) - e * std::cos(psi) / (s * s);
  g.dtheta = -e * std::cos(psi) / r;
  return g;
}

std::string to_string(PlaneStop s) {
  switch (s) {
    case PlaneStop::FlatStop: return "flat_stop";
    case PlaneStop::TMax: return "t_max";
    case PlaneStop::StepFailure: return "step_failure";
    case PlaneStop::ExitRadius: return "exit_radius";
  }
  return "unknown";
}

namespace {

PlaneSample make_sample(double t, double r, double theta) {
  const PlanePoint p{r, theta};
  return PlaneSample{t, r, theta, pdm_value(p), pdm_grad(p).norm()};
}

// sign = -1 descends, +1 ascends; state (r, theta)
OdeRhs plane_rhs(double sign) {
  return [sign](double, const StateVector& y, StateVector& dy) {
    const PlaneGradient g = pdm_grad({y(0), y(1)});
    dy.resize(2);
    dy(0) = sign * g.dr;
    dy(1) = sign * g.dtheta / y(0);
  };
}

}  // namespace

PlaneTrajectory flow2d(const PlanePoint& p0, const Flow2dOptions& opts) {
  if (!(p0.r > 0.0)) throw DomainError("flow2d: r must be positive");
  PlaneTrajectory traj;
  traj.samples.push_back(make_sample(0.0, p0.r, p0.theta));

  StepControl ctl;
  ctl.rel_tol = opts.rel_tol;
  ctl.abs_tol = opts.abs_tol;
  ctl.h_max = opts.h_max;
  bool flat = false;
  StepHooks hooks;
  hooks.admissible = [](const StateVector& a, const StateVector& b) {
    return b(0) > 0.0 && pdm_value({b(0), b(1)}) <= pdm_value({a(0), a(1)});
  };
  hooks.observer = [&](double t, const StateVector& y) {
    const PlaneSample prev = traj.samples.back();
    traj.samples.push_back(make_sample(t, y(0), y(1)));
    const PlaneSample& cur = traj.samples.back();
    flat = std::abs(cur.f - prev.f) / (cur.t - prev.t) < opts.df_stop;
    return !flat;
  };
  StateVector y0(2);
  y0 << p0.r, p0.theta;
  const IntegrationResult res = integrate_dopri5(plane_rhs(-1.0), 0.0, y0, opts.t_max, ctl, hooks);
  traj.accepted_steps = res.accepted;
  traj.rejected_steps = res.rejected;
  if (flat) {
    traj.stop = PlaneStop::FlatStop;
  } else if (res.status == IntegrationStatus::ReachedEnd) {
    traj.stop = PlaneStop::TMax;
  } else {
    traj.stop = PlaneStop::StepFailure;
  }
  return traj;
}

WindingReport winding(const PlaneTrajectory& traj, double band) {
  WindingReport w;
  w.band = band;
  w.r_min = std::numeric_limits<double>::infinity();
  w.r_max = -w.r_min;
  w.monotone = true;
  const PlaneSample* prev = nullptr;
  for (const auto& s : traj.samples) {
    const double dev = s.r - 1.0;
    if (!(dev < band)) {
      prev = nullptr;
      continue;
    }
    ++w.band_samples;
    w.r_min = std::min(w.r_min, dev);
    w.r_max = std::max(w.r_max, dev);
    if (prev != nullptr) {
      w.total += std::abs(s.theta - prev->theta);
      if (std::abs(dev) > std::abs(prev->r - 1.0)) w.monotone = false;
    }
    prev = &s;
  }
  if (w.band_samples == 0) {
    w.r_min = w.r_max = 0.0;
    w.monotone = false;
    return w;
  }
  w.status = (w.total >= kWitnessWinding && w.monotone) ? CertStatus::Pass : CertStatus::Fail;
  return w;
}

double plane_diameter(const std::vector<PlaneSample>& pts) {
  const std::size_t n = pts.size();
  if (n < 2) return 0.0;
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = pts[k].r * std::cos(pts[k].theta);
    y[k] = pts[k].r * std::sin(pts[k].theta);
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  // Andrew's monotone chain
  std::vector<std::size_t> hull(2 * n);
  std::size_t k = 0;
  const auto turn = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (x[a] - x[o]) * (y[b] - y[o]) - (y[a] - y[o]) * (x[b] - x[o]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], order[i]) <= 0.0) --k;
    hull[k++] = order[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], order[i]) <= 0.0) --k;
    hull[k++] = order[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  double d = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      d = std::max(d, std::hypot(x[hull[i]] - x[hull[j]], y[hull[i]] - y[hull[j]]));
    }
  }
  return d;
}

double plane_tail_diameter(const PlaneTrajectory& traj, double t_lo, double t_hi) {
  std::vector<PlaneSample> pts;
  for (const auto& s : traj.samples) {
    if (s.t >= t_lo && s.t <= t_hi) pts.push_back(s);
  }
  return plane_diameter(pts);
}

PlaneTailCertificate plane_tail_certificate(const PlaneTrajectory& traj, double window, double diam_tol) {
  PlaneTailCertificate c;
  if (traj.samples.empty()) return c;
  c.t_hi = traj.samples.back().t;
  c.t_lo = std::max(traj.samples.front().t, c.t_hi - window);
  c.diam_tol = diam_tol;
  c.diameter = plane_tail_diameter(traj, c.t_lo, c.t_hi);
  if (traj.stop == PlaneStop::FlatStop) {
    c.status = c.diameter <= diam_tol ? CertStatus::Pass : CertStatus::Fail;
  } else {
    // an unconverged run only certifies failure
    c.status = c.diameter > diam_tol ? CertStatus::Fail : CertStatus::Inconclusive;
  }
  return c;
}

std::size_t witness_cell_count(const WitnessSearchOptions& opts) {
  return static_cast<std::size_t>(std::max(0, opts.theta_cells) * std::max(0, opts.offset_cells));
}

WitnessCandidate witness_candidate(const WitnessSearchOptions& opts, int cell) {
  if (cell < 0 || static_cast<std::size_t>(cell) >= witness_cell_count(opts)) {
    throw DomainError("witness_candidate: cell out of range");
  }
  WitnessCandidate c;
  c.cell = cell;
  const int ti = cell % opts.theta_cells;
  const int oi = cell / opts.theta_cells;
  // angular travel inside the band is about 1/s0 - 1/band along the spiral
  const double s0 = 1.0 / (1.0 / opts.band + kWitnessWinding + 1.0 + oi);
  c.start = {1.0 + s0, 2.0 * std::numbers::pi * ti / opts.theta_cells};

  // ascent samples with the step that led to each; t is filled in reversed
  std::vector<PlaneSample> ascent;
  std::vector<double> steps;
  ascent.push_back(make_sample(0.0, c.start.r, c.start.theta));
  steps.push_back(0.0);
  StepControl ctl;
  ctl.rel_tol = opts.rel_tol;
  ctl.abs_tol = opts.abs_tol;
  ctl.h_init = 1.0;
  bool exited = false;
  bool failed = false;
  long accepted = 0, rejected = 0;
  StateVector y(2);
  y << c.start.r, c.start.theta;
  // The total time grows to ~1e25 while late steps are O(1); restarting the
  // clock every segment keeps t + h representable.
  constexpr long kSegment = 1000;
  while (!exited && !failed && accepted < opts.max_steps) {
    double t_prev = 0.0;
    long in_segment = 0;
    StepHooks hooks;
    hooks.observer = [&](double t, const StateVector& yy) {
      ascent.push_back(make_sample(0.0, yy(0), yy(1)));
      steps.push_back(t - t_prev);
      t_prev = t;
      exited = yy(0) >= opts.exit_radius;
      return !exited && ++in_segment < kSegment;
    };
    ctl.max_steps = std::max<long>(1, opts.max_steps - accepted - rejected);
    const IntegrationResult res = integrate_linearly_implicit(plane_rhs(1.0), 0.0, y, 1e300, ctl, hooks);
    accepted += res.accepted;
    rejected += res.rejected;
    y = res.y;
    ctl.h_init = res.h_next;
    failed = res.status != IntegrationStatus::Stopped;
  }

  c.seed = {ascent.back().r, ascent.back().theta};
  auto& tr = c.trajectory;
  tr.accepted_steps = accepted;
  tr.rejected_steps = rejected;
  tr.stop = exited ? PlaneStop::ExitRadius : PlaneStop::StepFailure;
  tr.samples.resize(ascent.size());
  double t = 0.0;
  for (std::size_t k = ascent.size(); k-- > 0;) {
    tr.samples[ascent.size() - 1 - k] = ascent[k];
    tr.samples[ascent.size() - 1 - k].t = t;
    t += steps[k];
  }
  // drop the relaxation onto the spiral (r first falls during the ascent)
  std::size_t r_min = 0;
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    if (tr.samples[k].r < tr.samples[r_min].r) r_min = k;
  }
  tr.samples.resize(r_min + 1);
  c.start = {tr.samples.back().r, tr.samples.back().theta};
  c.f_monotone = true;
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    if (tr.samples[k].f > tr.samples[k - 1].f + 1e-10) c.f_monotone = false;
  }
  c.winding = winding(tr, opts.band);
  c.is_witness = exited && c.f_monotone && c.winding.status == CertStatus::Pass && c.seed.r >= opts.exit_radius &&
                 c.seed.r <= 1.5;
  return c;
}

WitnessReport assemble_witness_report(std::vector<WitnessCandidate> candidates, double band) {
  WitnessReport rep;
  rep.candidates = std::move(candidates);
  for (std::size_t k = 0; k < rep.candidates.size(); ++k) {
    if (rep.candidates[k].is_witness) {
      rep.found = true;
      rep.index = k;
      break;
    }
  }
  if (!rep.found) return rep;
  // the part of the witness inside the band, where it winds
  std::vector<PlaneSample> tail;
  const auto& w = rep.candidates[rep.index].trajectory;
  for (const auto& s : w.samples) {
    if (s.r - 1.0 < band) tail.push_back(s);
  }
  rep.tail.diam_tol = 1e-6;
  rep.tail.diameter = plane_diameter(tail);
  rep.tail.t_lo = tail.empty() ? 0.0 : tail.front().t;
  rep.tail.t_hi = tail.empty() ? 0.0 : tail.back().t;
  rep.tail.status = rep.tail.diameter <= rep.tail.diam_tol ? CertStatus::Pass : CertStatus::Fail;
  return rep;
}

}  // namespace momentflow
