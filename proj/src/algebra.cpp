#include "momentflow/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace momentflow {

namespace {

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

CMatrix unit_entry(int n, int r, int c) {
  CMatrix e = CMatrix::Zero(n, n);
  e(r, c) = 1.0;
  return e;
}

// Hermitian basis of all n x n Hermitian matrices supported on `idx`.
std::vector<HermitianMatrix> hermitian_span(int n, const std::vector<int>& idx) {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  std::vector<HermitianMatrix> out;
  for (int a : idx) out.push_back(HermitianMatrix::hermitian_part(unit_entry(n, a, a)));
  for (std::size_t p = 0; p < idx.size(); ++p) {
    for (std::size_t q = p + 1; q < idx.size(); ++q) {
      const int j = idx[p], k = idx[q];
      CMatrix sym = (unit_entry(n, j, k) + unit_entry(n, k, j)) * s;
      CMatrix asym = (-i * unit_entry(n, j, k) + i * unit_entry(n, k, j)) * s;
      out.push_back(HermitianMatrix::hermitian_part(sym));
      out.push_back(HermitianMatrix::hermitian_part(asym));
    }
  }
  return out;
}

// Modified Gram-Schmidt with pivoting on the largest residual. Returns the
// orthonormal basis; throws DomainError naming `what` when a candidate is
// dependent on the others.
std::vector<HermitianMatrix> orthonormalize(std::vector<HermitianMatrix> cand,
                                            const std::string& what) {
  std::vector<double> scale(cand.size());
  for (std::size_t k = 0; k < cand.size(); ++k) {
    scale[k] = cand[k].norm();
    if (scale[k] <= kDependenceTol) {
      throw DomainError(what + ": generator " + std::to_string(k) + " is zero");
    }
  }
  std::vector<HermitianMatrix> basis;
  std::vector<bool> used(cand.size(), false);
  for (std::size_t step = 0; step < cand.size(); ++step) {
    std::size_t best = cand.size();
    double best_ratio = -1.0;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (used[k]) continue;
      const double ratio = cand[k].norm() / scale[k];
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = k;
      }
    }
    if (best_ratio < kDependenceTol) {
      throw DomainError(what + ": generators are linearly dependent (rank " +
                        std::to_string(basis.size()) + " < " + std::to_string(cand.size()) + ")");
    }
    used[best] = true;
    HermitianMatrix b = cand[best] * (1.0 / cand[best].norm());
    // second pass against the accumulated basis keeps <B_i, B_j> at rounding level
    for (const auto& prev : basis) b = b - prev * trace_inner(prev, b);
    b = b * (1.0 / b.norm());
    basis.push_back(b);
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (!used[k]) cand[k] = cand[k] - b * trace_inner(b, cand[k]);
    }
  }
  return basis;
}

std::string weights_string(const std::vector<std::vector<int>>& w) {
  std::ostringstream os;
  os << '[';
  for (std::size_t r = 0; r < w.size(); ++r) {
    if (r) os << ',';
    os << '[';
    for (std::size_t c = 0; c < w[r].size(); ++c) {
      if (c) os << ',';
      os << w[r][c];
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// HermitianMatrix

HermitianMatrix::HermitianMatrix(CMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DomainError("HermitianMatrix: matrix is not square");
  const double dev = max_abs(m_ - m_.adjoint());
  if (dev > tol) {
    throw DomainError("HermitianMatrix: deviation from conjugate transpose " +
                      std::to_string(dev) + " exceeds tolerance");
  }
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index n) {
  HermitianMatrix h;
  h.m_ = CMatrix::Zero(n, n);
  return h;
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index n) {
  HermitianMatrix h;
  h.m_ = CMatrix::Identity(n, n);
  return h;
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
  HermitianMatrix h;
  h.m_ = d.cast<cplx>().asDiagonal();
  return h;
}

HermitianMatrix HermitianMatrix::hermitian_part(const CMatrix& m) {
  HermitianMatrix h;
  h.m_ = 0.5 * (m + m.adjoint());
  return h;
}

double HermitianMatrix::norm() const { return std::sqrt(std::max(0.0, trace_inner(*this, *this))); }

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  HermitianMatrix h;
  h.m_ = m_ + o.m_;
  return h;
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  HermitianMatrix h;
  h.m_ = m_ - o.m_;
  return h;
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
  HermitianMatrix h;
  h.m_ = m_ * s;
  return h;
}

double trace_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  // tr(AB) = sum_jk A_jk B_kj = sum_jk A_jk conj(B_jk) for Hermitian B
  return (a.matrix().array() * b.matrix().array().conjugate()).sum().real();
}

// ---------------------------------------------------------------------------
// GroupKind

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::FullUnitary: return "full-unitary";
    case GroupKind::SpecialUnitary: return "special-unitary";
    case GroupKind::Torus: return "torus";
    case GroupKind::Block: return "block";
    case GroupKind::Custom: return "custom";
  }
  return "unknown";
}

GroupKind group_kind_from_string(const std::string& s) {
  for (GroupKind k : {GroupKind::FullUnitary, GroupKind::SpecialUnitary, GroupKind::Torus,
                      GroupKind::Block, GroupKind::Custom}) {
    if (to_string(k) == s) return k;
  }
  throw DomainError("unknown group kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// GroupSetup

GroupSetup GroupSetup::build(GroupKind kind, int n, const GroupParams& params) {
  if (n < 1) throw DomainError("group setup: n must be positive");
  GroupSetup s;
  s.n_ = n;
  s.kind_ = kind;

  std::vector<HermitianMatrix> cand;
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);

  switch (kind) {
    case GroupKind::FullUnitary:
      cand = hermitian_span(n, all);
      break;

    case GroupKind::SpecialUnitary: {
      if (n < 2) throw DomainError("special-unitary: n must be at least 2");
      for (int j = 0; j + 1 < n; ++j) {
        RVector d = RVector::Zero(n);
        d(j) = 1.0;
        d(j + 1) = -1.0;
        cand.push_back(HermitianMatrix::diagonal(d));
      }
      auto full = hermitian_span(n, all);
      // off-diagonal generators follow the n diagonal units in hermitian_span
      cand.insert(cand.end(), full.begin() + n, full.end());
      break;
    }

    case GroupKind::Torus: {
      const auto& w = params.weights;
      if (w.empty()) throw DomainError("torus: weight matrix is empty");
      if (static_cast<int>(w.size()) > n) {
        throw DomainError("torus: weight matrix has more rows (" + std::to_string(w.size()) +
                          ") than n = " + std::to_string(n));
      }
      for (const auto& row : w) {
        if (static_cast<int>(row.size()) != n) {
          throw DomainError("torus: every weight row must have n = " + std::to_string(n) +
                            " entries");
        }
        RVector d(n);
        for (int i = 0; i < n; ++i) d(i) = row[i];
        cand.push_back(HermitianMatrix::diagonal(d));
      }
      s.params_.weights = w;
      try {
        s.basis_ = orthonormalize(cand, "torus");
      } catch (const DomainError&) {
        throw DomainError("torus: weight matrix " + weights_string(w) +
                          " is rank-deficient; rows must be linearly independent");
      }
      return s;
    }

    case GroupKind::Block: {
      const auto& b = params.blocks;
      if (b.empty()) throw DomainError("block: partition is empty");
      int total = 0;
      for (int sz : b) {
        if (sz < 1) throw DomainError("block: partition entries must be positive");
        total += sz;
      }
      if (total != n) {
        throw DomainError("block: partition sums to " + std::to_string(total) + ", expected n = " +
                          std::to_string(n));
      }
      int start = 0;
      for (int sz : b) {
        std::vector<int> idx(sz);
        std::iota(idx.begin(), idx.end(), start);
        auto part = hermitian_span(n, idx);
        cand.insert(cand.end(), part.begin(), part.end());
        start += sz;
      }
      s.params_.blocks = b;
      break;
    }

    case GroupKind::Custom: {
      if (params.generators.empty()) throw DomainError("custom: no generators given");
      const cplx i(0.0, 1.0);
      for (std::size_t k = 0; k < params.generators.size(); ++k) {
        const CMatrix& x = params.generators[k];
        if (x.rows() != n || x.cols() != n) {
          throw DomainError("custom: generator " + std::to_string(k) + " is not n x n");
        }
        if (max_abs(x + x.adjoint()) > kDependenceTol) {
          throw DomainError("custom: generator " + std::to_string(k) + " is not skew-Hermitian");
        }
        cand.push_back(HermitianMatrix::hermitian_part(i * x));
      }
      s.params_.generators = params.generators;
      s.basis_ = orthonormalize(cand, "custom");
      const double res = s.lie_closure_residual();
      if (res > kDependenceTol) {
        s.warnings_.push_back("custom: span is not closed under the commutator (residual " +
                              std::to_string(res) + "); equivariance checks may fail");
      }
      return s;
    }
  }

  s.basis_ = orthonormalize(cand, to_string(kind));
  return s;
}

std::string GroupSetup::id() const {
  std::ostringstream os;
  os << to_string(kind_) << "(n=" << n_;
  switch (kind_) {
    case GroupKind::Torus: os << ";W=" << weights_string(params_.weights); break;
    case GroupKind::Block:
      os << ";blocks=[";
      for (std::size_t k = 0; k < params_.blocks.size(); ++k) os << (k ? "," : "") << params_.blocks[k];
      os << ']';
      break;
    case GroupKind::Custom: os << ";generators=" << params_.generators.size(); break;
    default: break;
  }
  os << ')';
  return os.str();
}

RVector GroupSetup::coefficients(const HermitianMatrix& a) const {
  if (a.dim() != n_) throw DomainError("coefficients: dimension mismatch");
  RVector c(basis_.size());
  for (std::size_t k = 0; k < basis_.size(); ++k) c(k) = trace_inner(a, basis_[k]);
  return c;
}

HermitianMatrix GroupSetup::from_coefficients(const RVector& c) const {
  if (static_cast<std::size_t>(c.size()) != basis_.size()) {
    throw DomainError("from_coefficients: expected " + std::to_string(basis_.size()) + " coefficients");
  }
  HermitianMatrix h = HermitianMatrix::zero(n_);
  for (std::size_t k = 0; k < basis_.size(); ++k) h = h + basis_[k] * c(k);
  return h;
}

CMatrix GroupSetup::group_element(const RVector& c) const { return unitary_exp(from_coefficients(c)); }

double GroupSetup::lie_closure_residual() const {
  const cplx i(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t j = 0; j < basis_.size(); ++j) {
    for (std::size_t k = j + 1; k < basis_.size(); ++k) {
      const CMatrix xj = i * basis_[j].matrix();
      const CMatrix xk = i * basis_[k].matrix();
      const HermitianMatrix br = HermitianMatrix::hermitian_part(i * (xj * xk - xk * xj));
      worst = std::max(worst, max_abs((br - project(br, *this)).matrix()));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// free functions

HermitianMatrix project(const HermitianMatrix& a, const GroupSetup& setup) {
  if (a.dim() != setup.n()) {
    throw DomainError("project: matrix is " + std::to_string(a.dim()) + "x" +
                      std::to_string(a.dim()) + ", setup has n = " + std::to_string(setup.n()));
  }
  HermitianMatrix out = HermitianMatrix::zero(setup.n());
  for (const auto& b : setup.basis()) out = out + b * trace_inner(a, b);
  return out;
}

HermitianMatrix adjoint_act(const CMatrix& g, const HermitianMatrix& a) {
  if (g.rows() != a.dim() || g.cols() != a.dim()) throw DomainError("adjoint_act: dimension mismatch");
  const double dev = max_abs(g * g.adjoint() - CMatrix::Identity(g.rows(), g.cols()));
  if (dev > kUnitaryTol) throw DomainError("adjoint_act: g is not unitary");
  return HermitianMatrix::hermitian_part(g * a.matrix() * g.adjoint());
}

CMatrix unitary_exp(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix());
  const CVector phases = (es.eigenvalues().cast<cplx>() * cplx(0.0, 1.0)).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXd weight_gram(const std::vector<std::vector<int>>& weights) {
  const auto d = static_cast<Eigen::Index>(weights.size());
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = 0; l < d; ++l) {
      double s = 0.0;
      for (std::size_t i = 0; i < weights[k].size(); ++i) s += double(weights[k][i]) * weights[l][i];
      g(k, l) = s;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json setup_to_json(const GroupSetup& setup) {
  nlohmann::json j;
  j["kind"] = to_string(setup.kind());
  j["n"] = setup.n();
  switch (setup.kind()) {
    case GroupKind::Torus: j["weights"] = setup.params().weights; break;
    case GroupKind::Block: j["blocks"] = setup.params().blocks; break;
    case GroupKind::Custom: {
      auto gens = nlohmann::json::array();
      for (const auto& x : setup.params().generators) {
        std::vector<double> flat;
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          for (Eigen::Index c = 0; c < x.cols(); ++c) {
            flat.push_back(x(r, c).real());
            flat.push_back(x(r, c).imag());
          }
        }
        gens.push_back(flat);
      }
      j["generators"] = gens;
      break;
    }
    default: break;
  }
  return j;
}

GroupSetup setup_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("setup: expected a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw DomainError("setup: missing string field 'kind'");
  if (!j.contains("n") || !j["n"].is_number_integer()) throw DomainError("setup: missing integer field 'n'");
  const GroupKind kind = group_kind_from_string(j["kind"].get<std::string>());
  const int n = j["n"].get<int>();
  GroupParams p;
  try {
    if (kind == GroupKind::Torus) {
      if (!j.contains("weights")) throw DomainError("setup: torus requires 'weights'");
      p.weights = j["weights"].get<std::vector<std::vector<int>>>();
    } else if (kind == GroupKind::Block) {
      if (!j.contains("blocks")) throw DomainError("setup: block requires 'blocks'");
      p.blocks = j["blocks"].get<std::vector<int>>();
    } else if (kind == GroupKind::Custom) {
      if (!j.contains("generators")) throw DomainError("setup: custom requires 'generators'");
      for (const auto& g : j["generators"]) {
        const auto flat = g.get<std::vector<double>>();
        if (n < 1 || flat.size() != static_cast<std::size_t>(2 * n * n)) {
          throw DomainError("setup: custom generator must have 2*n*n entries");
        }
        CMatrix x(n, n);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) {
            const std::size_t at = 2 * static_cast<std::size_t>(r * n + c);
            x(r, c) = cplx(flat[at], flat[at + 1]);
          }
        }
        p.generators.push_back(x);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("setup: ") + e.what());
  }
  return GroupSetup::build(kind, n, p);
}

}  // namespace momentflow
