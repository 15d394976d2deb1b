#pragma once

#include <Eigen/Dense>
#include <vector>

#include "projcons/errors.hpp"
#include "projcons/linalg.hpp"

namespace projcons {

// Real mn x mn matrix viewed as an m x m grid of n x n blocks.  This is the
// carrier for products of P (S kron I) P matrices and for the mixed matrix
// norm that measures their contraction.
struct BlockMatrix {
  int m = 0;
  int n = 0;
  Matrix data;

  BlockMatrix() = default;
  BlockMatrix(int m_, int n_)
      : m(m_), n(n_), data(Matrix::Zero(static_cast<Eigen::Index>(m_) * n_,
                                        static_cast<Eigen::Index>(m_) * n_)) {
    if (m_ < 1 || n_ < 1) throw ShapeError("BlockMatrix: m and n must be positive");
  }

  Eigen::Block<Matrix> block(int i, int j) {
    return data.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * n, n, n);
  }
  Eigen::Block<const Matrix> block(int i, int j) const {
    return data.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * n, n, n);
  }

  static BlockMatrix identity(int m, int n) {
    BlockMatrix out(m, n);
    out.data.setIdentity();
    return out;
  }
};

inline BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b) {
  if (a.m != b.m || a.n != b.n) throw ShapeError("BlockMatrix product: partition mismatch");
  BlockMatrix out(a.m, a.n);
  out.data = a.data * b.data;
  return out;
}

// <Q>: the m x m matrix of blockwise spectral norms.
inline Matrix block_gains(const BlockMatrix& q) {
  Matrix gains(q.m, q.m);
  for (int i = 0; i < q.m; ++i)
    for (int j = 0; j < q.m; ++j) gains(i, j) = spectral_norm(q.block(i, j));
  return gains;
}

// Mixed matrix norm ||Q|| = |<Q>|_inf, the maximum row sum of blockwise
// spectral norms.  Sub-multiplicative on the whole block-matrix space.
inline double mixed_norm(const BlockMatrix& q) {
  const Matrix gains = block_gains(q);
  double best = 0.0;
  for (int i = 0; i < q.m; ++i) best = std::max(best, gains.row(i).sum());
  return best;
}

// S kron I_n as a BlockMatrix: block (i, j) = S_ij * I.
inline BlockMatrix kron_lift(const Matrix& s, int n) {
  if (s.rows() != s.cols()) throw ShapeError("kron_lift: S must be square");
  BlockMatrix out(static_cast<int>(s.rows()), n);
  for (int i = 0; i < out.m; ++i)
    for (int j = 0; j < out.m; ++j)
      out.block(i, j) = s(i, j) * Matrix::Identity(n, n);
  return out;
}

inline BlockMatrix block_diagonal(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw ShapeError("block_diagonal: need at least one block");
  const int n = static_cast<int>(blocks.front().rows());
  BlockMatrix out(static_cast<int>(blocks.size()), n);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != n || blocks[i].cols() != n)
      throw ShapeError("block_diagonal: blocks must share one square shape");
    out.block(static_cast<int>(i), static_cast<int>(i)) = blocks[i];
  }
  return out;
}

inline void check_row_stochastic(const Matrix& s, double tol = 1e-12) {
  if (s.rows() != s.cols()) throw ContractViolation("stochastic matrix must be square");
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (std::abs(s.row(i).sum() - 1.0) > tol)
      throw ContractViolation("matrix is not row-stochastic (row sum off by more than tol)");
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if (s(i, j) < -tol) throw ContractViolation("matrix is not row-stochastic (negative entry)");
  }
}

// P (S kron I) P with P = block-diagonal(P_1..P_m); block (i, j) is
// S_ij * P_i * P_j.  S must be row-stochastic.
inline BlockMatrix sandwich(const std::vector<Matrix>& projectors, const Matrix& s) {
  detail::check_projector_family(projectors);
  const int m = static_cast<int>(projectors.size());
  if (s.rows() != m || s.cols() != m)
    throw ShapeError("sandwich: S must be m x m for m projectors");
  check_row_stochastic(s);
  const int n = static_cast<int>(projectors.front().rows());
  BlockMatrix out(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (s(i, j) != 0.0)
        out.block(i, j) = s(i, j) * (projectors[static_cast<std::size_t>(i)] *
                                     projectors[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace projcons
