#include <cmath>

#include <doctest.h>

#include "momentflow/lojasiewicz.hpp"
#include "momentflow/strata.hpp"

using namespace momentflow;

namespace {

const GroupSetup& torus11() {
  static const auto s = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{1, -1}}});
  return s;
}
const GroupSetup& torus110() {
  static const auto s = GroupSetup::build(GroupKind::Torus, 3, {.weights = {{1, -1, 0}}});
  return s;
}

FlowOptions tight(double t_max = 1e4, double grad_stop = 1e-8) {
  FlowOptions o;
  o.rel_tol = 1e-12;
  o.abs_tol = 1e-14;
  o.t_max = t_max;
  o.grad_stop = grad_stop;
  return o;
}

const Trajectory& run11() {
  static const Trajectory t = [] {
    CVector v(2);
    v << std::sqrt(0.9), std::sqrt(0.1);
    return integrate(ProjectivePoint(v), torus11(), tight());
  }();
  return t;
}

const Trajectory& run110() {
  static const Trajectory t = [] {
    CVector v(3);
    v << 0.6, 0.0, 0.8;
    return integrate(ProjectivePoint(v), torus110(), tight(1e9, 1e-12));
  }();
  return t;
}

}  // namespace

TEST_CASE("Morse-Bott exponent for W=(1,-1)") {
  const auto fit = fit_exponent(run11());
  CHECK(fit.alpha == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(fit.alpha - 0.5) <= 0.05);
  CHECK(std::abs(fit.b) < 1e-12);
  CHECK_FALSE(fit.flagged);
  CHECK(fit.c_prime == doctest::Approx(1.0 / ((1.0 - fit.alpha) * fit.c)));
  // ||grad f||^2 = 8 f (1 - 2 f) for this setup
  CHECK(fit.c == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("quartic degeneracy near e3 for W=(1,-1,0)") {
  const auto fit = fit_exponent(run110());
  CHECK(std::abs(fit.alpha - 0.75) <= 0.05);
  CHECK(distance(run110().final_sample().point, ProjectivePoint::basis_point(3, 2)) < 1e-2);
}

TEST_CASE("fit errors") {
  CVector v(2);
  v << 1, 1;
  const auto stationary = integrate(ProjectivePoint(v), torus11(), FlowOptions{});
  CHECK_THROWS_AS(fit_exponent(stationary), FitError);
  try {
    fit_exponent(stationary);
  } catch (const FitError& e) {
    CHECK(std::string(e.what()).find("insufficient tail") != std::string::npos);
  }
  FlowOptions short_run;
  short_run.t_max = 0.05;
  CVector w(2);
  w << std::sqrt(0.9), std::sqrt(0.1);
  CHECK_THROWS_AS(fit_exponent(integrate(ProjectivePoint(w), torus11(), short_run)), FitError);
}

TEST_CASE("fixed exponent fits only c") {
  LojaOptions o;
  o.fixed_alpha = 0.5;
  const auto fit = fit_exponent(run11(), o);
  CHECK(fit.alpha == 0.5);
  CHECK(fit.c > 0);
}

TEST_CASE("limit value extrapolation") {
  CHECK(std::abs(estimate_limit_value(run11())) < 1e-14);
  CHECK(std::abs(estimate_limit_value(run110())) < 1e-12);
}

TEST_CASE("gradient inequality on the fit window") {
  const auto fit = fit_exponent(run11());
  const auto c = verify_gradient_inequality(run11(), fit);
  CHECK(c.status == CertStatus::Pass);
  CHECK(c.violations == 0);
  CHECK_FALSE(c.lowered);
}

TEST_CASE("gradient inequality on the critical set itself") {
  const auto fit = fit_exponent(run11());
  CVector v(2);
  v << 1, std::polar(1.0, 0.3);
  const std::vector<ProjectivePoint> on_level(5, ProjectivePoint(v));
  const auto c = verify_gradient_inequality(torus11(), fit, on_level);
  CHECK(c.status == CertStatus::Pass);
  CHECK(c.violations == 0);
}

TEST_CASE("gradient inequality on a dense level region") {
  const auto fit = fit_exponent(run11());
  const auto region = sample_level_region(torus11(), fit.b, 0.1, 10000, 3);
  REQUIRE(region.size() == 10000);
  for (const auto& p : region) REQUIRE(std::abs(f_value(p, torus11()) - fit.b) < 0.1);
  const auto c = verify_gradient_inequality(torus11(), fit, region);
  CHECK(c.status == CertStatus::Pass);
  // ||grad f|| / sqrt(f) = sqrt(8 (1 - 2 f)): infimum sqrt(6.4) at the edge of the region
  CHECK(c.c_empirical == doctest::Approx(std::sqrt(6.4)).epsilon(0.01));
  CHECK(c.c_reported <= c.c_fit);
  CHECK(c.c_reported > 0.85 * c.c_fit);
}

TEST_CASE("Morse-Bott exponent is rejected on the quartic example") {
  // c fitted with alpha = 1/2 on an early stretch, then tested closer to e3
  FlowOptions early = tight(200.0);
  CVector v(3);
  v << 0.6, 0.0, 0.8;
  const auto head = integrate(ProjectivePoint(v), torus110(), early);
  LojaOptions o;
  o.fixed_alpha = 0.5;
  o.fixed_b = 0.0;
  o.tail_fraction = 1.0;
  auto head_fit = head;
  head_fit.termination = Termination::GradStop;  // fit only needs the samples
  const auto fit = fit_exponent(head_fit, o);
  std::vector<ProjectivePoint> later;
  for (const auto& s : run110().samples) {
    if (s.t > 1e4) later.push_back(s.point);
  }
  REQUIRE(!later.empty());
  const auto c = verify_gradient_inequality(torus110(), fit, later);
  CHECK(c.violations > later.size() / 2);
  CHECK(c.lowered);
  CHECK(c.c_empirical < 0.1 * c.c_fit);
  // the quartic exponent holds on the same points
  const auto good = verify_gradient_inequality(torus110(), fit_exponent(run110()), later);
  CHECK(good.violations == 0);
}

TEST_CASE("length bound") {
  const auto fit = fit_exponent(run11());
  const auto zero = verify_length_bound(run11(), fit, fit.t_lo, fit.t_lo);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  const double mid = 0.5 * (fit.t_lo + fit.t_hi);
  const auto a = verify_length_bound(run11(), fit, fit.t_lo, mid);
  const auto b = verify_length_bound(run11(), fit, mid, fit.t_hi);
  CHECK(a.status == CertStatus::Pass);
  CHECK(b.status == CertStatus::Pass);
  CHECK(a.slack >= -a.quad_tol);
  CHECK_THROWS_AS(verify_length_bound(run11(), fit, fit.t_lo - 1.0, fit.t_hi), DomainError);
  const auto w = verify_length_bound_window(run11(), fit);
  CHECK(w.status == CertStatus::Pass);
  CHECK(w.violations == 0);

  const auto fit2 = fit_exponent(run110());
  const auto w2 = verify_length_bound_window(run110(), fit2);
  CHECK(w2.status == CertStatus::Pass);
  CHECK(w2.worst >= 0.0);
}

TEST_CASE("distance bound") {
  const auto fit = fit_exponent(run11());
  const auto lim = omega_limit(run11(), final_tenth_window(run11()), 1e-6);
  const auto c = verify_distance_bound(run11(), fit, lim);
  CHECK(c.status == CertStatus::Pass);
  CHECK(c.violations == 0);

  FlowOptions short_run;
  short_run.t_max = 0.05;
  CVector w(2);
  w << std::sqrt(0.9), std::sqrt(0.1);
  const auto truncated = integrate(ProjectivePoint(w), torus11(), short_run);
  const auto lim2 = omega_limit(truncated, truncated.t_end(), 1e-6);
  CHECK(verify_distance_bound(run11(), fit, lim2).status == CertStatus::Inconclusive);
}

TEST_CASE("region radius from critical values") {
  CHECK(default_region_radius(0.0, {0.0, 0.5}) == doctest::Approx(0.25));
  CHECK(default_region_radius(0.5, {0.0, 0.2, 0.5, 0.8}) == doctest::Approx(0.15));
  const auto vals = torus_critical_values(torus11());
  CHECK(default_region_radius(0.0, vals) == doctest::Approx(0.25));
}

TEST_CASE("continuity probe at a generic point") {
  CVector v(2);
  v << std::sqrt(0.9), std::sqrt(0.1);
  ProbeOptions o;
  o.mc_probes = 100;
  const auto r = continuity_probe(torus11(), ProjectivePoint(v), 0.1, o);
  CHECK(r.found);
  CHECK(r.delta > 0);
  CHECK(r.mc_probes == 100);
  CHECK(r.mc_failures == 0);
  CHECK(r.mc_max_distance < 0.1);
}

TEST_CASE("continuity probe with a huge eps") {
  CVector v(2);
  v << std::sqrt(0.9), std::sqrt(0.1);
  ProbeOptions o;
  o.mc_probes = 20;
  const auto r = continuity_probe(torus11(), ProjectivePoint(v), 3.2, o);
  CHECK(r.found);
  CHECK(r.delta == doctest::Approx(o.delta_max));
  CHECK(r.mc_failures == 0);
}

TEST_CASE("continuity fails across a stratum boundary") {
  ProbeOptions o;
  o.mc_probes = 20;
  const auto r = continuity_probe(torus11(), ProjectivePoint::basis_point(2, 0), 0.1, o);
  CHECK((!r.found || r.mc_failures > 0));
}
