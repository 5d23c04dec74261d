#include "momentflow/moment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace momentflow {

namespace {

// Relative gradient errors are measured against max(||grad f||, floor) so that
// setups with grad f == 0 are held to an absolute 1e-10-level standard.
constexpr double kGradCheckFloor = 1e-4;

void check_dim(const ProjectivePoint& p, const GroupSetup& setup, const char* what) {
  if (p.dim() != setup.n()) {
    throw DomainError(std::string(what) + ": point has dimension " + std::to_string(p.dim()) +
                      ", setup has n = " + std::to_string(setup.n()));
  }
}

RVector random_coefficients(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RVector c(dim);
  for (std::size_t k = 0; k < dim; ++k) c(k) = normal(rng);
  return c;
}

}  // namespace

MomentValue moment(const ProjectivePoint& p, const GroupSetup& setup) {
  check_dim(p, setup, "moment");
  const CVector& v = p.rep();
  RVector c(setup.dim());
  HermitianMatrix h = HermitianMatrix::zero(setup.n());
  std::size_t k = 0;
  for (const auto& b : setup.basis()) {
    // <v v*, B> = v* B v
    c(k) = v.dot(b.matrix() * v).real();
    h = h + b * c(k);
    ++k;
  }
  return {h, c};
}

double f_value(const ProjectivePoint& p, const GroupSetup& setup) {
  return moment(p, setup).coeffs.squaredNorm();
}

TangentVector grad_f(const ProjectivePoint& p, const GroupSetup& setup) {
  const MomentValue mu = moment(p, setup);
  const CVector& v = p.rep();
  const CVector hv = mu.H.matrix() * v;
  const cplx vhv = v.dot(hv);
  return {p, 4.0 * (hv - vhv.real() * v)};
}

TangentVector fundamental_vector(const HermitianMatrix& a, const ProjectivePoint& p,
                                 const GroupSetup& setup) {
  check_dim(p, setup, "fundamental_vector");
  const double residual = (a - project(a, setup)).matrix().cwiseAbs().maxCoeff();
  if (residual > kDependenceTol) {
    throw DomainError("fundamental_vector: A is not in the Lie algebra (residual " +
                      std::to_string(residual) + ")");
  }
  return horizontal_project(p, cplx(0.0, 1.0) * (a.matrix() * p.rep()));
}

double directional_derivative(const std::function<double(const ProjectivePoint&)>& fn,
                              const ProjectivePoint& p, const CVector& w, double step) {
  const ProjectivePoint plus(p.rep() + step * w);
  const ProjectivePoint minus(p.rep() - step * w);
  return (fn(plus) - fn(minus)) / (2.0 * step);
}

DefiningRelationReport check_moment_defining_relation(const ProjectivePoint& p, const GroupSetup& setup,
                                                      int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DefiningRelationReport rep;
  rep.samples = samples;
  constexpr double step = 1e-6;
  for (int s = 0; s < samples; ++s) {
    const HermitianMatrix a = setup.from_coefficients(random_coefficients(setup.dim(), rng));
    const TangentVector w = random_tangent(p, rng);
    const auto pairing = [&](const ProjectivePoint& q) { return q.rep().dot(a.matrix() * q.rep()).real(); };
    const double lhs = directional_derivative(pairing, p, w.dir, step);
    const TangentVector xm = fundamental_vector(a, p, setup);
    const double sigma = kSymplecticScale * metric(complex_structure(xm), w);
    if (rep.sign == 0 && std::abs(sigma) > 1e-6 && std::abs(lhs) > 1e-6) {
      rep.sign = (lhs / sigma) > 0.0 ? 1 : -1;
    }
    const int sgn = rep.sign == 0 ? 1 : rep.sign;
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs - sgn * sigma));
  }
  return rep;
}

DefiningRelationReport check_moment_defining_relation(const GroupSetup& setup, int samples,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DefiningRelationReport total;
  total.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const ProjectivePoint p = random_point(setup.n(), rng);
    const auto one = check_moment_defining_relation(p, setup, 1, rng());
    if (total.sign == 0) total.sign = one.sign;
    // a single sign must serve every sample
    double residual = one.max_residual;
    if (one.sign != 0 && total.sign != 0 && one.sign != total.sign) residual = std::numeric_limits<double>::infinity();
    total.max_residual = std::max(total.max_residual, residual);
  }
  return total;
}

CMatrix random_group_element(const GroupSetup& setup, std::mt19937_64& rng) {
  return setup.group_element(random_coefficients(setup.dim(), rng) * 2.0);
}

double check_equivariance(const GroupSetup& setup, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const CMatrix g = random_group_element(setup, rng);
    const ProjectivePoint p = random_point(setup.n(), rng);
    const HermitianMatrix lhs = moment(act(g, p), setup).H;
    const HermitianMatrix rhs = adjoint_act(g, moment(p, setup).H);
    worst = std::max(worst, (lhs - rhs).matrix().cwiseAbs().maxCoeff());
  }
  return worst;
}

double check_gradient(const GroupSetup& setup, int samples, std::uint64_t seed, double step,
                      const GradientFn& grad_fn) {
  std::mt19937_64 rng(seed);
  const auto f = [&](const ProjectivePoint& q) { return f_value(q, setup); };
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ProjectivePoint p = random_point(setup.n(), rng);
    const TangentVector w = random_tangent(p, rng);
    const TangentVector g = grad_fn(p, setup);
    const double fd = directional_derivative(f, p, w.dir, step);
    const double an = metric(g, w);
    worst = std::max(worst, std::abs(fd - an) / std::max(g.norm(), kGradCheckFloor));
  }
  return worst;
}

}  // namespace momentflow
