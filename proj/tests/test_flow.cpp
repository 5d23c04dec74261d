#include <cmath>

#include <doctest.h>

#include "momentflow/flow.hpp"
#include "momentflow/integrator.hpp"

using namespace momentflow;

namespace {

const GroupSetup& torus11() {
  static const auto s = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{1, -1}}});
  return s;
}

ProjectivePoint seed91() {
  CVector v(2);
  v << std::sqrt(0.9), std::sqrt(0.1);
  return ProjectivePoint(v);
}

// u = |v1|^2 satisfies u' = -8u(1-u)(2u-1); classical RK4 with a fine fixed step
double scalar_oracle(double u, double t, int steps) {
  const auto rhs = [](double x) { return -8.0 * x * (1.0 - x) * (2.0 * x - 1.0); };
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    const double k1 = rhs(u), k2 = rhs(u + h / 2 * k1), k3 = rhs(u + h / 2 * k2), k4 = rhs(u + h * k3);
    u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return u;
}

}  // namespace

TEST_CASE("dopri5 on exponential decay") {
  const OdeRhs rhs = [](double, const StateVector& y, StateVector& dy) { dy = -y; };
  StateVector y0(1);
  y0 << 1.0;
  StepControl ctl;
  ctl.rel_tol = 1e-10;
  ctl.abs_tol = 1e-14;
  const auto r = integrate_dopri5(rhs, 0.0, y0, 5.0, ctl);
  CHECK(r.status == IntegrationStatus::ReachedEnd);
  CHECK(r.t == 5.0);
  CHECK(std::abs(r.y(0) - std::exp(-5.0)) < 1e-11);
  CHECK(r.h_next > 0);
}

TEST_CASE("linearly implicit driver on a stiff linear system") {
  const OdeRhs rhs = [](double, const StateVector& y, StateVector& dy) {
    dy.resize(2);
    dy << -1e4 * (y(0) - std::cos(y(1))), 1.0;
  };
  StateVector y0(2);
  y0 << 0.0, 0.0;
  StepControl ctl;
  ctl.rel_tol = 1e-6;
  ctl.abs_tol = 1e-10;
  const auto r = integrate_linearly_implicit(rhs, 0.0, y0, 1.0, ctl);
  CHECK(r.status == IntegrationStatus::ReachedEnd);
  CHECK(std::abs(r.y(0) - std::cos(1.0)) < 1e-3);
  CHECK(r.accepted < 2000);
}

TEST_CASE("observer stops integration") {
  const OdeRhs rhs = [](double, const StateVector& y, StateVector& dy) { dy = -y; };
  StateVector y0(1);
  y0 << 1.0;
  StepHooks hooks;
  hooks.observer = [](double t, const StateVector&) { return t < 1.0; };
  const auto r = integrate_dopri5(rhs, 0.0, y0, 10.0, StepControl{}, hooks);
  CHECK(r.status == IntegrationStatus::Stopped);
  CHECK(r.t >= 1.0);
  CHECK(r.t < 10.0);
}

TEST_CASE("stationary seeds") {
  CVector v(2);
  v << 1, 1;
  const auto traj = integrate(ProjectivePoint(v), torus11(), FlowOptions{});
  CHECK(traj.termination == Termination::GradStop);
  for (const auto& s : traj.samples) CHECK(s.f < 1e-15);
  CHECK(arc_length(traj, traj.samples.front().t, traj.t_end()) == 0.0);
  const auto lim = omega_limit(traj, final_tenth_window(traj), 1e-6);
  CHECK(lim.certificate.diameter == 0.0);

  const auto fu = GroupSetup::build(GroupKind::FullUnitary, 3);
  const auto t2 = integrate(random_point(3, std::uint64_t{1}), fu, FlowOptions{});
  CHECK(t2.termination == Termination::GradStop);
  for (const auto& s : t2.samples) CHECK(s.f == doctest::Approx(1.0));
}

TEST_CASE("W=(1,-1) flow matches the scalar ODE and converges to the equator") {
  FlowOptions opts;
  opts.rel_tol = 1e-11;
  opts.abs_tol = 1e-14;
  const auto traj = integrate(seed91(), torus11(), opts);
  REQUIRE(traj.termination == Termination::GradStop);

  for (std::size_t k = 0; k < traj.samples.size(); k += std::max<std::size_t>(1, traj.samples.size() / 7)) {
    const auto& s = traj.samples[k];
    const double u = std::norm(s.point.rep()(0));
    CHECK(std::abs(u - scalar_oracle(0.9, s.t, 20000)) < 1e-8);
    // coordinates stay real and positive up to the common phase
    const CVector c = s.point.canonical_rep();
    CHECK(std::abs(c(0).imag()) < 1e-12);
    CHECK(std::abs(c(1).imag()) < 1e-12);
    CHECK(c(1).real() > 0);
  }
  for (std::size_t k = 1; k < traj.samples.size(); ++k) CHECK(traj.samples[k].f <= traj.samples[k - 1].f);

  CVector eq(2);
  eq << 1, 1;
  const auto lim = omega_limit(traj, final_tenth_window(traj), 1e-6);
  CHECK(lim.certificate.status == CertStatus::Pass);
  CHECK(distance(lim.point, ProjectivePoint(eq)) < 1e-6);
  CHECK(lim.certificate.diameter <= 1e-8);
}

TEST_CASE("arc length properties") {
  const auto traj = integrate(seed91(), torus11(), FlowOptions{});
  const double t0 = traj.samples.front().t, t1 = traj.t_end();
  const double len = arc_length(traj, t0, t1);
  const double d = distance(traj.seed, traj.final_sample().point);
  CHECK(std::isfinite(len));
  CHECK(len >= d - 1e-6);
  // the path is a geodesic segment here, so the ratio is 1 up to the integration tolerance
  CHECK(len / d >= 1.0 - 1e-7);
  CHECK(len == doctest::Approx(d).epsilon(1e-7));
  CHECK(traj.final_sample().arc == doctest::Approx(len));
  // the sample-only quadrature is cruder where ||grad f|| is not exponential
  CHECK(std::abs(arc_length_quadrature(traj, t0, t1) - len) < 1e-2);
  CHECK(arc_length(traj, 0.7, 0.7) == 0.0);
  CHECK(arc_length(traj, 0.2, 0.9) == doctest::Approx(arc_length(traj, 0.2, 0.5) + arc_length(traj, 0.5, 0.9)));
  CHECK_THROWS_AS(arc_length(traj, t0, t1 + 1.0), DomainError);
}

TEST_CASE("t_max truncation gives an inconclusive certificate") {
  FlowOptions opts;
  opts.t_max = 0.05;
  const auto traj = integrate(seed91(), torus11(), opts);
  CHECK(traj.termination == Termination::TMax);
  const auto lim = omega_limit(traj, traj.t_end(), 1e-6);
  CHECK(lim.certificate.status == CertStatus::Inconclusive);
  CHECK(lim.certificate.diameter > 1e-6);
}

TEST_CASE("sample stride thins the record") {
  FlowOptions a, b;
  b.sample_stride = 4;
  const auto ta = integrate(seed91(), torus11(), a);
  const auto tb = integrate(seed91(), torus11(), b);
  CHECK(tb.samples.size() < ta.samples.size());
  CHECK(tb.t_end() == ta.t_end());
}

TEST_CASE("flow options validation") {
  FlowOptions o;
  CHECK_NOTHROW(o.validate());
  o.grad_stop = 1e-13;
  CHECK_THROWS_AS(o.validate(), DomainError);
  o = FlowOptions{};
  o.t_max = -1;
  CHECK_THROWS_AS(o.validate(), DomainError);
  o = FlowOptions{};
  o.sample_stride = 0;
  CHECK_THROWS_AS(o.validate(), DomainError);
}

TEST_CASE("flows are deterministic") {
  const auto s = GroupSetup::build(GroupKind::Torus, 3, {.weights = {{3, -1, -1}}});
  const auto p = random_point(3, std::uint64_t{77});
  const auto a = integrate(p, s, FlowOptions{});
  const auto b = integrate(p, s, FlowOptions{});
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(a.final_sample().f == b.final_sample().f);
  CHECK(a.final_sample().point.rep() == b.final_sample().point.rep());
}
