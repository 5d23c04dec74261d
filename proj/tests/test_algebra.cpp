#include <cmath>

#include <doctest.h>

#include "momentflow/algebra.hpp"

using namespace momentflow;

namespace {

double gram_error(const GroupSetup& s) {
  double err = 0.0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    for (std::size_t j = 0; j < s.dim(); ++j) {
      err = std::max(err, std::abs(trace_inner(s.basis()[i], s.basis()[j]) - (i == j ? 1.0 : 0.0)));
    }
  }
  return err;
}

HermitianMatrix diag2(double a, double b) {
  RVector d(2);
  d << a, b;
  return HermitianMatrix::diagonal(d);
}

}  // namespace

TEST_CASE("full unitary basis spans all Hermitian matrices") {
  const auto s = GroupSetup::build(GroupKind::FullUnitary, 2);
  CHECK(s.dim() == 4);
  CHECK(gram_error(s) < 1e-12);
  CMatrix m(2, 2);
  m << cplx(0.3, 0), cplx(0.1, -0.7), cplx(0.1, 0.7), cplx(-1.2, 0);
  const HermitianMatrix a(m);
  CHECK((project(a, s) - a).norm() < 1e-12);
}

TEST_CASE("torus W=(1,-1) basis is diag(1,-1)/sqrt2") {
  const auto s = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{1, -1}}});
  REQUIRE(s.dim() == 1);
  CHECK((s.basis()[0] - diag2(1, -1) * (1 / std::sqrt(2.0))).norm() < 1e-12);
}

TEST_CASE("special unitary n=2 has three traceless orthonormal generators") {
  const auto s = GroupSetup::build(GroupKind::SpecialUnitary, 2);
  CHECK(s.dim() == 3);
  CHECK(gram_error(s) < 1e-12);
  for (const auto& b : s.basis()) CHECK(std::abs(b.trace()) < 1e-12);
}

TEST_CASE("dimensions of the other kinds") {
  CHECK(GroupSetup::build(GroupKind::FullUnitary, 3).dim() == 9);
  CHECK(GroupSetup::build(GroupKind::SpecialUnitary, 4).dim() == 15);
  CHECK(GroupSetup::build(GroupKind::Block, 3, {.blocks = {2, 1}}).dim() == 5);
  const auto t = GroupSetup::build(GroupKind::Torus, 3, {.weights = {{1, 0, 0}, {0, 1, 0}}});
  CHECK(t.dim() == 2);
  CHECK(gram_error(t) < 1e-12);
}

TEST_CASE("projection examples") {
  const auto su = GroupSetup::build(GroupKind::SpecialUnitary, 2);
  const auto tor = GroupSetup::build(GroupKind::Torus, 2, {.weights = {{1, -1}}});
  CHECK((project(diag2(1, 0), su) - diag2(0.5, -0.5)).norm() < 1e-12);
  CHECK((project(diag2(1, 0), tor) - diag2(0.5, -0.5)).norm() < 1e-12);
  // idempotent
  const auto p = project(diag2(0.3, 2), tor);
  CHECK((project(p, tor) - p).norm() < 1e-12);
}

TEST_CASE("adjoint action examples") {
  const auto a = diag2(1, 0);
  CHECK((adjoint_act(CMatrix::Identity(2, 2), a) - a).norm() < 1e-14);
  CMatrix g = CMatrix::Zero(2, 2);
  g(0, 0) = std::polar(1.0, 0.4);
  g(1, 1) = std::polar(1.0, -0.4);
  CHECK((adjoint_act(g, diag2(2, -3)) - diag2(2, -3)).norm() < 1e-14);
  CMatrix swap = CMatrix::Zero(2, 2);
  swap(0, 1) = swap(1, 0) = 1;
  CHECK((adjoint_act(swap, a) - diag2(0, 1)).norm() < 1e-14);
  CHECK_THROWS_AS(adjoint_act(CMatrix::Identity(2, 2) * 2.0, a), DomainError);
}

TEST_CASE("unitary_exp is unitary") {
  CMatrix m(2, 2);
  m << cplx(1, 0), cplx(0.5, 0.5), cplx(0.5, -0.5), cplx(-0.2, 0);
  const CMatrix u = unitary_exp(HermitianMatrix(m));
  CHECK((u * u.adjoint() - CMatrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("coefficients round trip") {
  const auto s = GroupSetup::build(GroupKind::SpecialUnitary, 3);
  RVector c(s.dim());
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = 0.1 * static_cast<double>(k) - 0.3;
  CHECK((s.coefficients(s.from_coefficients(c)) - c).norm() < 1e-12);
  CHECK_THROWS_AS(s.from_coefficients(RVector::Zero(2)), DomainError);
}

TEST_CASE("invalid setups are rejected") {
  CHECK_THROWS_AS(GroupSetup::build(GroupKind::Torus, 2, {.weights = {{1, -1}, {2, -2}}}), DomainError);
  CHECK_THROWS_AS(GroupSetup::build(GroupKind::Torus, 2, {.weights = {{1, -1, 0}}}), DomainError);
  CHECK_THROWS_AS(GroupSetup::build(GroupKind::Torus, 2, {}), DomainError);
  CHECK_THROWS_AS(GroupSetup::build(GroupKind::Block, 3, {.blocks = {2, 2}}), DomainError);
  CHECK_THROWS_AS(GroupSetup::build(GroupKind::SpecialUnitary, 1), DomainError);
  CHECK_THROWS_AS(GroupSetup::build(GroupKind::FullUnitary, 0), DomainError);
  CMatrix not_skew = CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(GroupSetup::build(GroupKind::Custom, 2, {.generators = {not_skew}}), DomainError);
  CHECK_THROWS_AS(HermitianMatrix(CMatrix::Ones(2, 3)), DomainError);
  CMatrix nh(2, 2);
  nh << 1, cplx(0, 1), cplx(0, 1), 1;
  CHECK_THROWS_AS(HermitianMatrix{nh}, DomainError);
}

TEST_CASE("custom generators: closed and non-closed spans") {
  // i * diag(1,-1) generates a circle: closed
  CMatrix x = CMatrix::Zero(2, 2);
  x(0, 0) = cplx(0, 1);
  x(1, 1) = cplx(0, -1);
  const auto circle = GroupSetup::build(GroupKind::Custom, 2, {.generators = {x}});
  CHECK(circle.dim() == 1);
  CHECK(circle.warnings().empty());
  // two Pauli directions without their commutator: not a Lie algebra
  CMatrix y = CMatrix::Zero(2, 2);
  y(0, 1) = cplx(0, 1);
  y(1, 0) = cplx(0, 1);
  const auto open = GroupSetup::build(GroupKind::Custom, 2, {.generators = {x, y}});
  CHECK(open.lie_closure_residual() > 1e-3);
  CHECK_FALSE(open.warnings().empty());
}

TEST_CASE("setup json round trip") {
  const auto s = GroupSetup::build(GroupKind::Torus, 3, {.weights = {{3, -1, -1}}});
  const auto back = setup_from_json(setup_to_json(s));
  CHECK(back.id() == s.id());
  CHECK(back.dim() == s.dim());
  CHECK_THROWS_AS(setup_from_json(nlohmann::json{{"kind", "torus"}, {"n", 2}}), DomainError);
  CHECK_THROWS_AS(setup_from_json(nlohmann::json{{"kind", "nonsense"}, {"n", 2}}), DomainError);
  CHECK_THROWS_AS(setup_from_json(nlohmann::json::array()), DomainError);
}

TEST_CASE("weight gram matrix") {
  const Eigen::MatrixXd g = weight_gram({{1, -1, 0}, {0, 1, -1}});
  CHECK(g(0, 0) == doctest::Approx(2));
  CHECK(g(0, 1) == doctest::Approx(-1));
  CHECK(g(1, 1) == doctest::Approx(2));
}
