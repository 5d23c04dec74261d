#include "momentflow/lojasiewicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace momentflow {

namespace {

double interpolate_f(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  auto it = std::lower_bound(s.begin(), s.end(), t, [](const FlowSample& a, double x) { return a.t < x; });
  if (it == s.begin()) return it->f;
  if (it == s.end()) return s.back().f;
  const auto prev = std::prev(it);
  if (it->t == prev->t) return it->f;
  const double w = (t - prev->t) / (it->t - prev->t);
  return (1.0 - w) * prev->f + w * it->f;
}

double power_gap(double f, double b, double alpha) { return std::pow(std::max(f - b, 0.0), 1.0 - alpha); }

std::vector<std::size_t> usable_window(const Trajectory& traj, double b, double fraction, double floor) {
  const std::size_t n = traj.samples.size();
  const auto start = static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(n)));
  std::vector<std::size_t> idx;
  for (std::size_t k = std::min(start, n); k < n; ++k) {
    const auto& s = traj.samples[k];
    if (s.f - b > floor && s.gradnorm > 0.0) idx.push_back(k);
  }
  return idx;
}

double decades(const Trajectory& traj, double b, const std::vector<std::size_t>& idx) {
  if (idx.size() < 2) return 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k : idx) {
    const double v = std::log10(traj.samples[k].f - b);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

}  // namespace

double estimate_limit_value(const Trajectory& traj) {
  const auto& s = traj.samples;
  if (s.empty()) throw DomainError("estimate_limit_value: empty trajectory");
  const double f_end = s.back().f;
  if (s.size() < 2) return f_end;
  const std::size_t back = std::min<std::size_t>(5, s.size() - 1);
  const FlowSample& a = s[s.size() - 1 - back];
  const FlowSample& z = s.back();
  const double dt = z.t - a.t;
  if (!(dt > 0.0) || !(z.gradnorm > 0.0) || !(a.gradnorm > z.gradnorm)) return f_end;
  // ||grad f|| ~ exp(-rate t) locally; the remaining decrease of f is
  // int_{t_end}^inf ||grad f||^2 = g_end^2 / (2 rate)
  const double rate = std::log(a.gradnorm / z.gradnorm) / dt;
  const double remaining = z.gradnorm * z.gradnorm / (2.0 * rate);
  return std::isfinite(remaining) ? f_end - remaining : f_end;
}

LojaFit fit_exponent(const Trajectory& traj, const LojaOptions& opts) {
  if (traj.termination != Termination::GradStop) {
    throw FitError("trajectory did not converge (termination " + to_string(traj.termination) + ")");
  }
  if (static_cast<int>(traj.samples.size()) < opts.min_samples) {
    throw FitError("insufficient tail: " + std::to_string(traj.samples.size()) + " samples");
  }
  LojaFit fit;
  fit.b = opts.fixed_b.value_or(estimate_limit_value(traj));
  // samples closer to b than the extrapolation error are not trustworthy
  const double floor = std::max(opts.f_floor, 100.0 * (traj.final_sample().f - fit.b));

  double fraction = std::clamp(opts.tail_fraction, 0.0, 1.0);
  std::vector<std::size_t> idx = usable_window(traj, fit.b, fraction, floor);
  while ((static_cast<int>(idx.size()) < opts.min_samples || decades(traj, fit.b, idx) < opts.min_decades) &&
         fraction < 1.0) {
    fraction = std::min(1.0, fraction * 1.5);
    idx = usable_window(traj, fit.b, fraction, floor);
  }
  if (static_cast<int>(idx.size()) < opts.min_samples) {
    throw FitError("insufficient tail: " + std::to_string(idx.size()) + " usable samples above f - b = " +
                   std::to_string(floor));
  }
  if (decades(traj, fit.b, idx) < opts.min_decades) fit.flagged = true;

  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd x(m), y(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& s = traj.samples[idx[static_cast<std::size_t>(k)]];
    x(k) = std::log(s.f - fit.b);
    y(k) = std::log(s.gradnorm);
  }
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw FitError("insufficient tail: f - b is constant over the window");
  const double slope = ((x.array() - mx) * (y.array() - my)).sum() / sxx;
  const double intercept = my - slope * mx;
  fit.residual = (y.array() - (slope * x.array() + intercept)).abs().maxCoeff();

  fit.alpha = opts.fixed_alpha.value_or(slope);
  if (!(fit.alpha > 0.0 && fit.alpha < 1.0)) {
    throw FitError("fitted exponent " + std::to_string(fit.alpha) + " is outside (0, 1)");
  }
  if (fit.alpha < 0.05 || fit.alpha > 0.95) fit.flagged = true;

  // supporting line: the largest log c below every sample
  fit.c = std::exp((y.array() - fit.alpha * x.array()).minCoeff());
  fit.c_prime = 1.0 / ((1.0 - fit.alpha) * fit.c);
  fit.t_lo = traj.samples[idx.front()].t;
  fit.t_hi = traj.samples[idx.back()].t;
  fit.samples = static_cast<int>(m);
  return fit;
}

namespace {

GradientInequalityCertificate check_ratio(const LojaFit& fit, const std::vector<std::pair<double, double>>& fg) {
  GradientInequalityCertificate cert;
  cert.c_fit = fit.c;
  cert.c_empirical = std::numeric_limits<double>::infinity();
  for (const auto& [fval, g] : fg) {
    const double d = std::abs(fval - fit.b);
    ++cert.samples;
    if (d <= kOnLevelTol) continue;  // 0 >= 0
    const double rhs = std::pow(d, fit.alpha);
    cert.c_empirical = std::min(cert.c_empirical, g / rhs);
    if (g < fit.c * rhs * (1.0 - 1e-12)) ++cert.violations;
  }
  cert.violation_fraction = cert.samples ? double(cert.violations) / double(cert.samples) : 0.0;
  cert.c_reported = std::min(cert.c_fit, cert.c_empirical);
  cert.lowered = cert.violations > 0;
  // a vanishing infimum means a critical point off level b inside the region
  cert.status = cert.c_reported > 1e-12 * cert.c_fit ? CertStatus::Pass : CertStatus::Fail;
  return cert;
}

}  // namespace

GradientInequalityCertificate verify_gradient_inequality(const GroupSetup& setup, const LojaFit& fit,
                                                         const std::vector<ProjectivePoint>& region_samples) {
  std::vector<std::pair<double, double>> fg;
  fg.reserve(region_samples.size());
  for (const auto& z : region_samples) fg.emplace_back(f_value(z, setup), grad_f(z, setup).norm());
  return check_ratio(fit, fg);
}

GradientInequalityCertificate verify_gradient_inequality(const Trajectory& traj, const LojaFit& fit) {
  std::vector<std::pair<double, double>> fg;
  for (const auto& s : traj.samples) {
    if (s.t >= fit.t_lo && s.t <= fit.t_hi) fg.emplace_back(s.f, s.gradnorm);
  }
  return check_ratio(fit, fg);
}

std::vector<ProjectivePoint> sample_level_region(const GroupSetup& setup, double b, double radius,
                                                 std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ProjectivePoint> out;
  const std::size_t max_attempts = 10000 * std::max<std::size_t>(count, 1);
  for (std::size_t a = 0; a < max_attempts && out.size() < count; ++a) {
    ProjectivePoint p = random_point(setup.n(), rng);
    if (std::abs(f_value(p, setup) - b) < radius) out.push_back(std::move(p));
  }
  return out;
}

double default_region_radius(double b, const std::vector<double>& critical_values) {
  double gap = std::numeric_limits<double>::infinity();
  for (double v : critical_values) {
    const double d = std::abs(v - b);
    if (d > 1e-9) gap = std::min(gap, d);
  }
  return std::isfinite(gap) ? 0.5 * gap : 1.0;
}

LengthBoundCertificate verify_length_bound(const Trajectory& traj, const LojaFit& fit, double t0, double t1) {
  if (t0 > t1) throw DomainError("verify_length_bound: t0 > t1");
  if (t0 < fit.t_lo || t1 > fit.t_hi) throw DomainError("verify_length_bound: interval outside the fit window");
  LengthBoundCertificate cert;
  const double f0 = interpolate_f(traj, t0), f1 = interpolate_f(traj, t1);
  cert.lhs = fit.c_prime * (power_gap(f0, fit.b, fit.alpha) - power_gap(f1, fit.b, fit.alpha));
  cert.rhs = arc_length(traj, t0, t1);
  cert.quad_tol = std::abs(cert.rhs - arc_length_quadrature(traj, t0, t1)) + 1e-12 * (1.0 + cert.rhs);
  cert.slack = cert.lhs - cert.rhs;
  cert.status = cert.slack >= -cert.quad_tol ? CertStatus::Pass : CertStatus::Fail;
  return cert;
}

WindowCertificate verify_length_bound_window(const Trajectory& traj, const LojaFit& fit) {
  WindowCertificate cert;
  cert.worst = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.samples) {
    if (s.t < fit.t_lo || s.t >= fit.t_hi) continue;
    const auto one = verify_length_bound(traj, fit, s.t, fit.t_hi);
    ++cert.checks;
    cert.worst = std::min(cert.worst, one.slack);
    if (one.status != CertStatus::Pass) ++cert.violations;
  }
  if (cert.checks == 0) {
    cert.worst = 0.0;
    return cert;
  }
  cert.status = cert.violations == 0 ? CertStatus::Pass : CertStatus::Fail;
  return cert;
}

WindowCertificate verify_distance_bound(const Trajectory& traj, const LojaFit& fit, const OmegaLimit& limit,
                                        double diam_tol) {
  WindowCertificate cert;
  if (limit.certificate.status == CertStatus::Inconclusive) return cert;
  for (const auto& s : traj.samples) {
    if (s.t < fit.t_lo || s.t > fit.t_hi) continue;
    const double lhs = distance(s.point, limit.point);
    const double rhs = fit.c_prime * power_gap(s.f, fit.b, fit.alpha) + diam_tol;
    ++cert.checks;
    if (lhs > rhs) {
      ++cert.violations;
      cert.worst = std::max(cert.worst, lhs - rhs);
    }
  }
  cert.status = cert.violations == 0 ? CertStatus::Pass : CertStatus::Fail;
  return cert;
}

ProbeResult continuity_probe(const GroupSetup& setup, const ProjectivePoint& x, double eps,
                             const ProbeOptions& opts) {
  ProbeResult res;
  res.eps = eps;
  if (!(eps > 0.0)) throw DomainError("continuity_probe: eps must be positive");

  const Trajectory tx = integrate(x, setup, opts.flow);
  if (tx.termination != Termination::GradStop) {
    res.diagnostics.push_back("x did not converge (termination " + to_string(tx.termination) + ")");
    return res;
  }
  LojaFit fit;
  if (tx.samples.size() == 1) {
    // x is critical: the bound is c'(f - b)^(1-alpha) = 0 for any constants
    fit.alpha = 0.5;
    fit.c = 1.0;
    fit.c_prime = 2.0;
    fit.b = tx.samples.front().f;
    res.diagnostics.push_back("x is a critical point; nominal constants alpha = 1/2, c' = 2");
  } else {
    try {
      fit = fit_exponent(tx, opts.loja);
    } catch (const FitError& e) {
      res.diagnostics.push_back(std::string("fit failed: ") + e.what());
      return res;
    }
  }

  // t with c'(f(phi_t x) - b)^(1-alpha) < eps/4, inside the fit window
  const FlowSample* at = nullptr;
  for (const auto& s : tx.samples) {
    if (s.t < fit.t_lo) continue;
    if (fit.c_prime * power_gap(s.f, fit.b, fit.alpha) < eps / 4.0) {
      at = &s;
      break;
    }
  }
  if (at == nullptr) {
    res.diagnostics.push_back("no recorded time satisfies c'(f - b)^(1-alpha) < eps/4");
    return res;
  }
  res.t_star = at->t;
  res.tail_bound = fit.c_prime * power_gap(at->f, fit.b, fit.alpha);
  const double gap_x = power_gap(at->f, fit.b, fit.alpha);
  const ProjectivePoint limit_x = tx.final_sample().point;

  FlowOptions to_t = opts.flow;
  to_t.grad_stop = 1e-12;
  to_t.t_max = res.t_star;
  const auto flow_to_t = [&](const ProjectivePoint& y) {
    if (res.t_star <= 0.0) return y;
    return integrate(y, setup, to_t).final_sample().point;
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto probe = [&](double delta) {
    const TangentVector dir = random_tangent(x, rng);
    return geodesic(x, delta * unit(rng), dir);
  };
  const auto recipe_holds = [&](double delta) {
    for (int k = 0; k < opts.probes_per_delta; ++k) {
      const ProjectivePoint yt = flow_to_t(probe(delta));
      if (!(distance(at->point, yt) < eps / 4.0)) return false;
      const double fy = f_value(yt, setup) - fit.b;
      if (fy < -1e-12) return false;  // below the critical value: not in this stable set
      if (!(fit.c_prime * std::abs(gap_x - power_gap(fy + fit.b, fit.b, fit.alpha)) < eps / 4.0)) return false;
    }
    return true;
  };

  double lo = opts.delta_max;
  while (lo >= opts.delta_floor && !recipe_holds(lo)) lo *= 0.5;
  if (lo < opts.delta_floor) {
    res.diagnostics.push_back("no delta above " + std::to_string(opts.delta_floor) + " satisfies the recipe");
    return res;
  }
  if (lo < opts.delta_max) {
    double hi = std::min(2.0 * lo, opts.delta_max);
    for (int k = 0; k < opts.bisection_steps; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (recipe_holds(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }

  // Monte-Carlo check of the conclusion on fresh probes; failures are reported, not searched away
  res.delta = lo;
  res.mc_probes = opts.mc_probes;
  for (int k = 0; k < opts.mc_probes; ++k) {
    const Trajectory ty = integrate(probe(lo), setup, opts.flow);
    const double d = distance(limit_x, ty.final_sample().point);
    res.mc_max_distance = std::max(res.mc_max_distance, d);
    if (ty.termination != Termination::GradStop || !(d < eps)) ++res.mc_failures;
  }
  res.found = res.mc_failures == 0;
  if (!res.found) {
    res.diagnostics.push_back(std::to_string(res.mc_failures) + " Monte-Carlo probes land at distance >= eps");
  }
  return res;
}

}  // namespace momentflow
