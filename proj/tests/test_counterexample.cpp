#include <cmath>
#include <numbers>

#include <doctest.h>

#include "momentflow/counterexample.hpp"

using namespace momentflow;

TEST_CASE("function values") {
  CHECK(pdm_value({1.0, 0.7}) == 0.0);
  CHECK(pdm_value({0.5, 0.0}) == doctest::Approx(0.26360).epsilon(1e-4));
  CHECK(pdm_value({0.5, 2.0}) == pdm_value({0.5, 0.0}));
  // e^-1 sin(1 / (sqrt 2 - 1)) = 0.367879 * 0.664932
  CHECK(pdm_value({std::sqrt(2.0), 0.0}) == doctest::Approx(std::exp(-1.0) * std::sin(1.0 + std::sqrt(2.0))));
  CHECK(pdm_value({std::sqrt(2.0), 0.0}) == doctest::Approx(0.244611).epsilon(1e-5));
  CHECK(pdm_value({1e-3, 0.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
}

TEST_CASE("gradient values") {
  const auto g = pdm_grad({0.5, 1.3});
  CHECK(g.dtheta == 0.0);
  CHECK(g.dr == doctest::Approx(-std::exp(-4.0 / 3.0) * 16.0 / 9.0));
  CHECK(g.dr == doctest::Approx(-0.46863).epsilon(1e-4));
  CHECK(pdm_grad({1.0, 0.0}).flat);
  CHECK(pdm_grad({1.0, 0.0}).norm() == 0.0);
  // near the origin: |d/dr f| ~ 2 r / e
  CHECK(std::abs(pdm_grad({1e-3, 0.0}).dr) == doctest::Approx(2e-3 * std::exp(-1.0)).epsilon(1e-3));
}

TEST_CASE("gradient matches finite differences outside the circle") {
  const double h = 1e-6;
  for (const PlanePoint p : {PlanePoint{std::sqrt(2.0), 0.0}, PlanePoint{1.3, 2.0}, PlanePoint{1.1, -1.0}}) {
    const auto g = pdm_grad(p);
    const double fr = (pdm_value({p.r + h, p.theta}) - pdm_value({p.r - h, p.theta})) / (2 * h);
    const double ft = (pdm_value({p.r, p.theta + h}) - pdm_value({p.r, p.theta - h})) / (2 * h) / p.r;
    CHECK(std::hypot(fr - g.dr, ft - g.dtheta) <= 1e-6 * g.norm());
  }
}

TEST_CASE("inside seed flows radially to a single point") {
  const auto traj = flow2d({0.5, 0.0});
  CHECK(traj.stop == PlaneStop::FlatStop);
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    REQUIRE(traj.samples[k].f <= traj.samples[k - 1].f);
    REQUIRE(traj.samples[k].r >= traj.samples[k - 1].r);
    REQUIRE(traj.samples[k].theta == 0.0);
  }
  CHECK(traj.samples.back().r < 1.0);
  CHECK(traj.samples.back().r > 0.95);
  const auto w = winding(traj, 1e-2);
  CHECK(w.total == 0.0);
  CHECK(w.status != CertStatus::Pass);
  const auto cert = plane_tail_certificate(traj, 10.0, 1e-6);
  CHECK(cert.status == CertStatus::Pass);
  CHECK(cert.diameter <= 1e-6);
}

TEST_CASE("seed near the origin drifts slowly") {
  Flow2dOptions o;
  o.t_max = 10.0;
  const auto traj = flow2d({1e-3, 0.0}, o);
  CHECK(traj.stop == PlaneStop::TMax);
  CHECK(traj.samples.back().r > 1e-3);
  CHECK(traj.samples.back().r < 1e-3 * std::exp(10.0 * 2.0 / std::exp(1.0)) * 1.01);
  CHECK_THROWS_AS(flow2d({0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(flow2d({-1.0, 0.0}), DomainError);
}

TEST_CASE("winding with an empty band is inconclusive") {
  PlaneTrajectory t;
  t.samples = {{0.0, 1.5, 0.0, 0.1, 0.1}, {1.0, 1.4, 0.5, 0.05, 0.1}};
  const auto w = winding(t, 1e-2);
  CHECK(w.status == CertStatus::Inconclusive);
  CHECK(w.band_samples == 0);
}

TEST_CASE("winding counts in-band angular travel") {
  PlaneTrajectory t;
  for (int k = 0; k <= 100; ++k) {
    const double r = 1.0 + 0.009 * (1.0 - k / 100.0) + 1e-4;
    t.samples.push_back({double(k), r, 0.2 * k, 0.0, 0.0});
  }
  const auto w = winding(t, 1e-2);
  CHECK(w.total == doctest::Approx(20.0));
  CHECK(w.monotone);
  CHECK(w.status == CertStatus::Pass);
  std::swap(t.samples[10].r, t.samples[50].r);
  CHECK_FALSE(winding(t, 1e-2).monotone);
}

TEST_CASE("plane diameter") {
  std::vector<PlaneSample> pts;
  for (int k = 0; k < 12; ++k) pts.push_back({0.0, 1.0, k * std::numbers::pi / 6, 0.0, 0.0});
  pts.push_back({0.0, 0.2, 1.0, 0.0, 0.0});
  CHECK(plane_diameter(pts) == doctest::Approx(2.0));
  CHECK(plane_diameter({}) == 0.0);
  CHECK(plane_diameter({pts[0]}) == 0.0);
}

TEST_CASE("witness search finds a spiralling trajectory") {
  const WitnessSearchOptions opts;
  CHECK(witness_cell_count(opts) == 24);
  const auto c = witness_candidate(opts, 0);
  CHECK(c.is_witness);
  CHECK(c.f_monotone);
  CHECK(c.winding.total >= kWitnessWinding);
  CHECK(c.seed.r >= opts.exit_radius);
  CHECK(c.seed.r <= 1.5);
  for (std::size_t k = 1; k < c.trajectory.samples.size(); ++k) {
    REQUIRE(c.trajectory.samples[k].t >= c.trajectory.samples[k - 1].t);
  }
  const auto rep = assemble_witness_report({c}, opts.band);
  CHECK(rep.found);
  CHECK(rep.tail.status == CertStatus::Fail);
  CHECK(rep.tail.diameter >= 1.0);
}
