#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "projcons/errors.hpp"

namespace projcons {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Singular values below kRankRelTol * sigma_max are treated as zero.
inline constexpr double kRankRelTol = 1e-10;

// Largest singular value; zero for an empty matrix.
inline double spectral_norm(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

namespace detail {

struct Svd {
  Eigen::JacobiSVD<Matrix> svd;
  int rank;
};

inline Svd rank_revealing_svd(const Matrix& a) {
  Svd out{Eigen::JacobiSVD<Matrix>(a, Eigen::ComputeFullU | Eigen::ComputeFullV), 0};
  const auto& sv = out.svd.singularValues();
  if (sv.size() > 0) {
    const double cutoff = kRankRelTol * sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff && sv(i) > 0.0) ++out.rank;
  }
  return out;
}

}  // namespace detail

// Orthonormal columns spanning ker A; the basis has n - rank(A) columns.
// The rank cutoff is relative to the largest singular value; callers whose
// input has a known scale may add an absolute floor so that numerically-zero
// matrices are treated as rank zero.
inline Matrix kernel_basis(const Matrix& a, double abs_floor = 0.0) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = abs_floor;
  if (sv.size() > 0) cutoff = std::max(cutoff, kRankRelTol * sv(0));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

// Orthogonal projector onto ker A, symmetrized as (P + P^T)/2.
inline Matrix kernel_projector(const Matrix& a) {
  const Eigen::Index n = a.cols();
  if (n < 1) throw ShapeError("kernel_projector: matrix must have at least one column");
  const Matrix k = kernel_basis(a);
  Matrix p = k * k.transpose();
  return 0.5 * (p + p.transpose());
}

// Minimum-norm solution of A x = b via the pseudoinverse.  Throws
// InconsistentEquation when the least-squares residual exceeds
// 1e-9 * (1 + |b|_2), i.e. when the system has no solution.
inline Vector particular_solution(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) throw ShapeError("particular_solution: row count of A must match b");
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Vector::Zero(n);
  const auto rsvd = detail::rank_revealing_svd(a);
  const auto& sv = rsvd.svd.singularValues();
  Vector coeffs = rsvd.svd.matrixU().transpose() * b;
  Vector scaled = Vector::Zero(sv.size());
  for (int i = 0; i < rsvd.rank; ++i) scaled(i) = coeffs(i) / sv(i);
  Vector x = rsvd.svd.matrixV().leftCols(sv.size()) * scaled;
  const double residual = (a * x - b).norm();
  if (residual > 1e-9 * (1.0 + b.norm()))
    throw InconsistentEquation("particular_solution: system has no solution (residual " +
                               std::to_string(residual) + ")");
  return x;
}

// One agent's private equation A_i x = b_i together with the derived
// orthogonal projector onto ker A_i and a particular (minimum-norm) solution.
struct AgentBlock {
  Matrix A;
  Vector b;
  Matrix P;
  Vector z;

  static AgentBlock from_equation(const Matrix& a, const Vector& b) {
    AgentBlock block;
    block.A = a;
    block.b = b;
    block.P = kernel_projector(a);
    block.z = particular_solution(a, b);
    return block;
  }

  double feasibility_residual(const Vector& x) const { return (A * x - b).norm(); }
};

// Subspace of R^n represented by an orthonormal basis (n x d, d may be 0).
struct Subspace {
  Matrix basis;

  int dim() const { return static_cast<int>(basis.cols()); }

  // Distance from v to the subspace, |B B' v - v|.
  double membership_defect(const Vector& v) const {
    return (basis * (basis.transpose() * v) - v).norm();
  }

  bool contains(const Vector& v, double tol) const { return membership_defect(v) <= tol; }
};

namespace detail {

inline void check_projector_family(const std::vector<Matrix>& projectors) {
  if (projectors.empty())
    throw ContractViolation("projector family must be nonempty");
  const Eigen::Index n = projectors.front().rows();
  for (const auto& p : projectors)
    if (p.rows() != n || p.cols() != n)
      throw ShapeError("projector family must share one square shape");
}

}  // namespace detail

// Orthonormal basis of the intersection of the projector images, computed as
// the kernel of the stacked (I - P_i).  Projectors have unit scale, so the
// stacked matrix gets an absolute rank floor: directions moved by less than
// 1e-10 count as fixed.
inline Subspace subspace_intersection(const std::vector<Matrix>& projectors) {
  detail::check_projector_family(projectors);
  const Eigen::Index n = projectors.front().rows();
  Matrix stacked(static_cast<Eigen::Index>(projectors.size()) * n, n);
  for (std::size_t i = 0; i < projectors.size(); ++i)
    stacked.middleRows(static_cast<Eigen::Index>(i) * n, n) =
        Matrix::Identity(n, n) - projectors[i];
  return Subspace{kernel_basis(stacked, 1e-10)};
}

// Agents in `subset` are redundant when the intersection of the other agents'
// projector images is contained in the intersection over `subset`.  Indices
// are 0-based; `subset` must be a nonempty proper subset of {0..m-1}.
inline bool is_redundant(const std::vector<Matrix>& projectors, const std::vector<int>& subset) {
  detail::check_projector_family(projectors);
  const int m = static_cast<int>(projectors.size());
  std::vector<bool> in_subset(static_cast<std::size_t>(m), false);
  for (int v : subset) {
    if (v < 0 || v >= m) throw ContractViolation("is_redundant: index out of range");
    in_subset[static_cast<std::size_t>(v)] = true;
  }
  int count = 0;
  for (bool flag : in_subset) count += flag ? 1 : 0;
  if (count == 0 || count == m)
    throw ContractViolation("is_redundant: subset must be nonempty and proper");

  std::vector<Matrix> complement;
  for (int i = 0; i < m; ++i)
    if (!in_subset[static_cast<std::size_t>(i)]) complement.push_back(projectors[static_cast<std::size_t>(i)]);
  const Subspace inter = subspace_intersection(complement);
  for (int col = 0; col < inter.dim(); ++col) {
    const Vector v = inter.basis.col(col);
    for (int i = 0; i < m; ++i) {
      if (!in_subset[static_cast<std::size_t>(i)]) continue;
      if ((projectors[static_cast<std::size_t>(i)] * v - v).norm() > 1e-9) return false;
    }
  }
  return true;
}

// Checks that no nonempty proper subset of agents is redundant.  Enumerates
// all 2^m - 2 subsets, so the check is gated to m <= 12.
inline bool is_non_redundant_set(const std::vector<Matrix>& projectors) {
  detail::check_projector_family(projectors);
  const int m = static_cast<int>(projectors.size());
  if (m > 12) throw BudgetExceeded("is_non_redundant_set: gated to m <= 12 agents");
  if (m < 2) return true;
  for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << m); ++mask) {
    std::vector<int> subset;
    for (int i = 0; i < m; ++i)
      if (mask & (std::uint64_t{1} << i)) subset.push_back(i);
    if (is_redundant(projectors, subset)) return false;
  }
  return true;
}

struct QuotientProjectors {
  Matrix Q;                     // d x n, orthonormal rows spanning the complement
  std::vector<Matrix> reduced;  // d x d projectors Q P_i Q'
};

// Quotients out the common image intersection: the rows of Q form an
// orthonormal basis of its orthogonal complement, and each reduced projector
// satisfies Q P_i = reduced_i Q with trivial joint intersection.  Throws
// DegenerateQuotient when the intersection is the whole space (all P_i = I),
// in which case the run is pure unconstrained consensus.
inline QuotientProjectors quotient_projectors(const std::vector<Matrix>& projectors) {
  detail::check_projector_family(projectors);
  const Eigen::Index n = projectors.front().rows();
  const Subspace inter = subspace_intersection(projectors);
  const Eigen::Index d = n - inter.dim();
  if (d == 0)
    throw DegenerateQuotient("quotient_projectors: intersection is the whole space (A = 0 case)");

  QuotientProjectors out;
  if (inter.dim() == 0) {
    out.Q = Matrix::Identity(n, n);
  } else {
    out.Q = kernel_basis(inter.basis.transpose()).transpose();
  }
  out.reduced.reserve(projectors.size());
  for (const auto& p : projectors) {
    Matrix reduced = out.Q * p * out.Q.transpose();
    out.reduced.push_back(0.5 * (reduced + reduced.transpose()));
  }
  return out;
}

}  // namespace projcons
