#pragma once

// Lie algebra of a closed subgroup of U(n), stored as a real subspace of
// Hermitian matrices. An element X of the (skew-Hermitian) algebra is
// represented by A = iX, so every pairing below is real and the trace form
// <A, B> = tr(AB) is positive definite.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace momentflow {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Raised when a caller violates an operation's precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kDependenceTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;

/// Square complex matrix equal to its conjugate transpose.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  /// Throws DomainError unless `m` is square and Hermitian within `tol`.
  explicit HermitianMatrix(CMatrix m, double tol = kHermitianTol);

  static HermitianMatrix zero(Eigen::Index n);
  static HermitianMatrix identity(Eigen::Index n);
  static HermitianMatrix diagonal(const RVector& d);
  /// Symmetrizes (m + m*)/2 without checking.
  static HermitianMatrix hermitian_part(const CMatrix& m);

  const CMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double trace() const { return m_.trace().real(); }
  double norm() const;

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  CMatrix m_;
};

/// Trace form tr(AB); real for Hermitian arguments.
double trace_inner(const HermitianMatrix& a, const HermitianMatrix& b);

enum class GroupKind { FullUnitary, SpecialUnitary, Torus, Block, Custom };

std::string to_string(GroupKind kind);
GroupKind group_kind_from_string(const std::string& s);

/// Kind-specific construction data. Only the member matching the kind is read.
struct GroupParams {
  std::vector<std::vector<int>> weights;  // torus: d x n integer weights
  std::vector<int> blocks;                // block: partition of n
  std::vector<CMatrix> generators;        // custom: skew-Hermitian
};

/// Immutable description of the acting group: an orthonormal Hermitian basis
/// of h = i*g together with the data it was built from.
class GroupSetup {
 public:
  /// Builds and orthonormalizes the basis. Throws DomainError on invalid
  /// parameters (rank-deficient weights, bad partition, non-skew generators).
  static GroupSetup build(GroupKind kind, int n, const GroupParams& params = {});

  int n() const { return n_; }
  GroupKind kind() const { return kind_; }
  std::size_t dim() const { return basis_.size(); }
  std::span<const HermitianMatrix> basis() const { return basis_; }
  const GroupParams& params() const { return params_; }
  /// Advisory messages, e.g. a failed Lie-closure check for custom setups.
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Short human-readable identifier, stable across runs.
  std::string id() const;

  /// Coordinates <A, B_k> of A in the orthonormal basis.
  RVector coefficients(const HermitianMatrix& a) const;
  HermitianMatrix from_coefficients(const RVector& c) const;

  /// exp(i * sum_k c_k B_k): an element of the identity component of the group.
  CMatrix group_element(const RVector& c) const;

  /// Largest entrywise deviation of i[iB_j, iB_k] from its projection.
  double lie_closure_residual() const;

 private:
  GroupSetup() = default;

  int n_ = 0;
  GroupKind kind_ = GroupKind::FullUnitary;
  GroupParams params_;
  std::vector<HermitianMatrix> basis_;
  std::vector<std::string> warnings_;
};

/// Orthogonal projection onto span(basis) under the trace form.
HermitianMatrix project(const HermitianMatrix& a, const GroupSetup& setup);

/// g A g*. Throws DomainError if g is not unitary within 1e-10.
HermitianMatrix adjoint_act(const CMatrix& g, const HermitianMatrix& a);

/// exp(iA) for Hermitian A, via the spectral decomposition.
CMatrix unitary_exp(const HermitianMatrix& a);

/// Gram matrix G_kl = sum_i W_ki W_li of the diagonal weight generators.
Eigen::MatrixXd weight_gram(const std::vector<std::vector<int>>& weights);

nlohmann::json setup_to_json(const GroupSetup& setup);
/// Throws DomainError on schema violations.
GroupSetup setup_from_json(const nlohmann::json& j);

}  // namespace momentflow
