#include "momentflow/projective.hpp"

#include <algorithm>
#include <cmath>

namespace momentflow {

ProjectivePoint::ProjectivePoint(const CVector& v) {
  if (v.size() < 1) throw DomainError("ProjectivePoint: empty vector");
  const double nv = v.norm();
  if (!(nv > 0.0) || !std::isfinite(nv)) throw DomainError("ProjectivePoint: zero or non-finite vector");
  rep_ = v / nv;
}

ProjectivePoint ProjectivePoint::basis_point(int n, int i) {
  if (i < 0 || i >= n) throw DomainError("basis_point: index out of range");
  CVector v = CVector::Zero(n);
  v(i) = 1.0;
  return ProjectivePoint(v);
}

ProjectivePoint ProjectivePoint::from_interleaved(const std::vector<double>& flat) {
  if (flat.empty() || flat.size() % 2 != 0) {
    throw DomainError("point: expected an even, nonzero number of reals (re, im interleaved)");
  }
  const auto n = static_cast<Eigen::Index>(flat.size() / 2);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(flat[2 * i], flat[2 * i + 1]);
  return ProjectivePoint(v);
}

CVector ProjectivePoint::canonical_rep() const {
  Eigen::Index at = 0;
  rep_.cwiseAbs().maxCoeff(&at);
  const cplx z = rep_(at);
  return rep_ * (std::abs(z) / z);
}

std::vector<double> ProjectivePoint::interleaved() const {
  const CVector c = canonical_rep();
  std::vector<double> out;
  out.reserve(2 * c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    out.push_back(c(i).real());
    out.push_back(c(i).imag());
  }
  return out;
}

double metric(const TangentVector& a, const TangentVector& b) { return a.dir.dot(b.dir).real(); }

TangentVector horizontal_project(const ProjectivePoint& base, const CVector& w) {
  const CVector& v = base.rep();
  if (w.size() != v.size()) throw DomainError("horizontal_project: dimension mismatch");
  return {base, w - v * v.dot(w)};
}

double distance(const ProjectivePoint& p, const ProjectivePoint& q) {
  if (p.dim() != q.dim()) throw DomainError("distance: dimension mismatch");
  const double ip = std::abs(p.rep().dot(q.rep()));
  // acos is ill-conditioned near 1; use the sine of the angle instead there
  if (ip > 0.9) {
    const CVector perp = q.rep() - p.rep() * p.rep().dot(q.rep());
    return std::asin(std::min(1.0, perp.norm()));
  }
  return std::acos(std::min(1.0, ip));
}

bool same_point(const ProjectivePoint& p, const ProjectivePoint& q, double tol) {
  return distance(p, q) <= tol;
}

ProjectivePoint retract(const ProjectivePoint& p, double t, const TangentVector& w) {
  return ProjectivePoint(p.rep() + t * w.dir);
}

ProjectivePoint geodesic(const ProjectivePoint& p, double angle, const TangentVector& w) {
  const double nw = w.norm();
  if (nw == 0.0) return p;
  return ProjectivePoint(std::cos(angle) * p.rep() + std::sin(angle) * (w.dir / nw));
}

ProjectivePoint midpoint(const ProjectivePoint& p, const ProjectivePoint& q) {
  const cplx ip = p.rep().dot(q.rep());
  const cplx phase = std::abs(ip) > 0.0 ? std::abs(ip) / ip : cplx(1.0);
  return ProjectivePoint(p.rep() + q.rep() * phase);
}

TangentVector complex_structure(const TangentVector& w) { return {w.base, cplx(0.0, 1.0) * w.dir}; }

ProjectivePoint act(const CMatrix& g, const ProjectivePoint& p) {
  if (g.cols() != p.dim()) throw DomainError("act: dimension mismatch");
  return ProjectivePoint(g * p.rep());
}

CVector gaussian_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = cplx(re, im);
  }
  return v;
}

ProjectivePoint random_point(int n, std::mt19937_64& rng) {
  if (n < 2) throw DomainError("random_point: n must be at least 2");
  return ProjectivePoint(gaussian_vector(n, rng));
}

ProjectivePoint random_point(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_point(n, rng);
}

TangentVector random_tangent(const ProjectivePoint& p, std::mt19937_64& rng) {
  for (;;) {
    TangentVector w = horizontal_project(p, gaussian_vector(p.dim(), rng));
    const double nw = w.norm();
    if (nw > 1e-12) {
      w.dir /= nw;
      return w;
    }
  }
}

}  // namespace momentflow
