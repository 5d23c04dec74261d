#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "momentflow/strata.hpp"

using namespace momentflow;

namespace {

const GroupSetup& torus11() {
  static const auto s = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{1, -1}}});
  return s;
}

std::vector<LimitRecord> limits_of(const GroupSetup& s, const std::vector<ProjectivePoint>& seeds) {
  std::vector<LimitRecord> out;
  for (const auto& p : seeds) {
    const auto t = integrate(p, s, FlowOptions{});
    out.push_back({t.final_sample().point, t.final_sample().f});
  }
  return out;
}

}  // namespace

TEST_CASE("W=(1,-1): equator plus two poles") {
  std::vector<ProjectivePoint> seeds;
  std::mt19937_64 rng(11);
  for (int k = 0; k < 60; ++k) seeds.push_back(random_point(2, rng));
  seeds.push_back(ProjectivePoint::basis_point(2, 0));
  seeds.push_back(ProjectivePoint::basis_point(2, 1));
  const auto cl = cluster_components(torus11(), limits_of(torus11(), seeds));
  REQUIRE(cl.components.size() == 3);
  CHECK(cl.components[0].b == doctest::Approx(0).scale(1e-10));
  CHECK(cl.components[0].members.size() == 60);
  CHECK(cl.components[1].b == doctest::Approx(0.5));
  CHECK(cl.components[2].b == doctest::Approx(0.5));
  CHECK(cl.label[60] != cl.label[61]);
  CHECK(cl.flags.empty());
}

TEST_CASE("without critical-path linking the equator falls apart") {
  std::vector<ProjectivePoint> seeds;
  std::mt19937_64 rng(12);
  for (int k = 0; k < 20; ++k) seeds.push_back(random_point(2, rng));
  StrataOptions o;
  o.link_critical_paths = false;
  CHECK(cluster_components(torus11(), limits_of(torus11(), seeds), o).components.size() > 1);
}

TEST_CASE("repeated limit gives one component") {
  const LimitRecord r{ProjectivePoint::basis_point(2, 0), 0.5};
  const auto cl = cluster_components(torus11(), {r, r, r});
  REQUIRE(cl.components.size() == 1);
  CHECK(cl.components[0].diameter == 0.0);
}

TEST_CASE("full unitary: one component at b = 1") {
  const auto fu = GroupSetup::build(GroupKind::FullUnitary, 3);
  std::vector<ProjectivePoint> seeds;
  std::mt19937_64 rng(13);
  for (int k = 0; k < 8; ++k) seeds.push_back(random_point(3, rng));
  const auto cl = cluster_components(fu, limits_of(fu, seeds));
  REQUIRE(cl.components.size() == 1);
  CHECK(cl.components[0].b == doctest::Approx(1.0));
}

TEST_CASE("nearby limits at different levels are flagged, not merged") {
  CVector a(2), b(2);
  a << 1, 0;
  b << 1, 1e-5;
  const auto cl = cluster_components(torus11(), {{ProjectivePoint(a), 0.5}, {ProjectivePoint(b), 0.4}});
  CHECK(cl.components.size() == 2);
  REQUIRE(cl.flags.size() == 1);
  CHECK(cl.flags[0].value_gap == doctest::Approx(0.1));
}

TEST_CASE("stratum assignment") {
  std::vector<ProjectivePoint> seeds;
  std::mt19937_64 rng(14);
  for (int k = 0; k < 10; ++k) seeds.push_back(random_point(2, rng));
  seeds.push_back(ProjectivePoint::basis_point(2, 0));
  auto comps = cluster_components(torus11(), limits_of(torus11(), seeds)).components;
  const std::size_t before = comps.size();

  CVector v(2);
  v << std::sqrt(0.9), std::sqrt(0.1);
  const int eq = assign_stratum(torus11(), integrate(ProjectivePoint(v), torus11(), FlowOptions{}), comps);
  CHECK(comps[eq].b == doctest::Approx(0).scale(1e-10));
  const int pole = assign_stratum(torus11(), integrate(ProjectivePoint::basis_point(2, 0), torus11(), {}), comps);
  CHECK(comps[pole].b == doctest::Approx(0.5));
  CHECK(comps.size() == before);

  // e2 was never seen: a provisional component is appended
  const int fresh = assign_stratum(torus11(), integrate(ProjectivePoint::basis_point(2, 1), torus11(), {}), comps);
  CHECK(comps.size() == before + 1);
  CHECK(comps[fresh].provisional);

  FlowOptions short_run;
  short_run.t_max = 0.01;
  CHECK_THROWS_AS(assign_stratum(torus11(), integrate(ProjectivePoint(v), torus11(), short_run), comps),
                  DomainError);
}

TEST_CASE("min-norm oracle examples") {
  const auto o1 = torus_min_norm_oracle(torus11(), {0, 1});
  CHECK(o1.value == doctest::Approx(0).scale(1e-14));
  CHECK(o1.beta.norm() < 1e-14);
  const auto t21 = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{2, -1}}});
  CHECK(torus_min_norm_oracle(t21, {0}).value == doctest::Approx(0.8));
  CHECK(torus_min_norm_oracle(t21, {1}).value == doctest::Approx(0.2));
  const auto t110 = GroupSetup::build(GroupKind::Torus, 3, {.weights = {{1, -1, 0}}});
  CHECK(torus_min_norm_oracle(t110, {2}).value == doctest::Approx(0).scale(1e-14));
  CHECK(torus_min_norm_oracle(t110, {0}).value == doctest::Approx(0.5));
  CHECK_THROWS_AS(torus_min_norm_oracle(t110, {}), DomainError);
  CHECK_THROWS_AS(torus_min_norm_oracle(t110, {3}), DomainError);
  CHECK_THROWS_AS(orthonormal_weights(GroupSetup::build(GroupKind::FullUnitary, 2)), DomainError);
}

TEST_CASE("oracle agrees with f at coordinate points for a rank-2 torus") {
  const auto s = GroupSetup::build(GroupKind::Torus, 3, {.weights = {{1, 0, -1}, {0, 2, -1}}});
  for (int i = 0; i < 3; ++i) {
    CHECK(torus_min_norm_oracle(s, {i}).value == doctest::Approx(f_value(ProjectivePoint::basis_point(3, i), s)));
  }
  // min-norm point of a segment lies in its relative interior or at an end
  const auto e = torus_min_norm_oracle(s, {0, 1});
  CHECK(e.value <= std::min(torus_min_norm_oracle(s, {0}).value, torus_min_norm_oracle(s, {1}).value) + 1e-14);
  CHECK(torus_min_norm_oracle(s, {0, 1, 2}).value == doctest::Approx(0).scale(1e-14));
}

TEST_CASE("critical values of W=(3,-1,-1)") {
  const auto s = GroupSetup::build(GroupKind::Torus, 3, {.weights = {{3, -1, -1}}});
  const auto v = torus_critical_values(s);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0).scale(1e-14));
  CHECK(v[1] == doctest::Approx(1.0 / 11));
  CHECK(v[2] == doctest::Approx(9.0 / 11));
}

TEST_CASE("semistability examples") {
  const auto t21 = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{2, -1}}});
  const auto t110 = GroupSetup::build(GroupKind::Torus, 3, {.weights = {{1, -1, 0}}});
  CVector d(2);
  d << 1, 1;
  CHECK(semistable(torus11(), ProjectivePoint(d)));
  CHECK_FALSE(semistable(t21, ProjectivePoint::basis_point(2, 0)));
  CHECK(semistable(t110, ProjectivePoint::basis_point(3, 2)));
  CHECK(support_of(ProjectivePoint::basis_point(3, 2)) == std::vector<int>{2});
}

TEST_CASE("flow limits match the oracle") {
  const auto t21 = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{2, -1}}});
  std::vector<ProjectivePoint> seeds{ProjectivePoint::basis_point(2, 0), ProjectivePoint::basis_point(2, 1)};
  std::mt19937_64 rng(15);
  for (int k = 0; k < 10; ++k) seeds.push_back(random_point(2, rng));
  std::vector<Trajectory> flows;
  for (const auto& p : seeds) flows.push_back(integrate(p, t21, FlowOptions{}));
  const auto cmp = compare_flow_vs_oracle(t21, seeds, flows);
  CHECK(cmp.pass());
  CHECK(cmp.max_value_error <= kOracleValueTol);
  CHECK(cmp.checks[0].oracle_value == doctest::Approx(0.8));
  CHECK(cmp.checks[0].limit_f == doctest::Approx(0.8));
  for (std::size_t k = 2; k < seeds.size(); ++k) {
    CHECK(cmp.checks[k].semistable);
    CHECK(cmp.checks[k].limit_f <= kZeroLevelTol);
  }
}

TEST_CASE("oracle comparison fails for unconverged flows") {
  const auto t21 = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{2, -1}}});
  FlowOptions short_run;
  short_run.t_max = 0.01;
  const auto p = random_point(2, std::uint64_t{3});
  const auto cmp = compare_flow_vs_oracle(t21, {p}, {integrate(p, t21, short_run)});
  CHECK_FALSE(cmp.pass());
}

TEST_CASE("tiny support coordinates are not asserted") {
  const auto t21 = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{2, -1}}});
  CVector v(2);
  v << 1, 1e-8;
  const ProjectivePoint p(v);
  FlowOptions o;
  o.t_max = 1.0;
  const auto cmp = compare_flow_vs_oracle(t21, {p}, {integrate(p, t21, o)});
  REQUIRE(cmp.checks.size() == 1);
  CHECK(cmp.checks[0].weak_support);
}
