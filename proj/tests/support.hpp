#pragma once

// Shared generators for the property-style tests.  Everything is driven by
// the library's own seeded rng so failures reproduce exactly.

#include <random>
#include <vector>

#include "projcons/graph.hpp"
#include "projcons/linalg.hpp"
#include "projcons/rng.hpp"

namespace test_support {

using projcons::Matrix;
using projcons::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = projcons::uniform_signed(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = projcons::uniform_signed(rng);
  return v;
}

// Orthogonal projector onto a random d-dimensional subspace of R^n.
inline Matrix random_projector(std::mt19937_64& rng, int n, int d) {
  if (d == 0) return Matrix::Zero(n, n);
  const Matrix basis = random_matrix(rng, n, d);
  const Matrix q = Eigen::HouseholderQR<Matrix>(basis).householderQ() * Matrix::Identity(n, d);
  Matrix p = q * q.transpose();
  return 0.5 * (p + p.transpose());
}

// Family of k projectors; when `share_direction` every image contains one
// common random line, so the joint intersection is nonzero.  Shared-direction
// draws keep the base image dimension below n-1, otherwise adding the shared
// line would turn a hyperplane projector into the identity.
inline std::vector<Matrix> random_projector_family(std::mt19937_64& rng, int n, int k,
                                                   bool share_direction = false) {
  std::vector<Matrix> family;
  Vector shared = random_vector(rng, n);
  shared.normalize();
  const int max_dim = share_direction ? std::max(1, n - 2) : n - 1;
  for (int i = 0; i < k; ++i) {
    const int d = 1 + static_cast<int>(projcons::uniform_int(rng, static_cast<std::uint64_t>(max_dim)));
    Matrix p = random_projector(rng, n, d);
    if (share_direction) {
      // extend the image by the shared line: P v = v afterwards
      const Vector residual = shared - p * shared;
      if (residual.norm() > 1e-8) {
        const Vector u = residual.normalized();
        p += u * u.transpose();
        p = 0.5 * (p + p.transpose());
      }
    }
    family.push_back(p);
  }
  return family;
}

// True when the family's intersection classification is numerically
// unambiguous: the stacked (I - P_i) matrix has no singular value near the
// rank cutoff, so "trivial" and "nonzero" stay meaningful at 1e-12 margins.
inline bool clearly_classified(const std::vector<Matrix>& family) {
  const Eigen::Index n = family.front().rows();
  Matrix stacked(static_cast<Eigen::Index>(family.size()) * n, n);
  for (std::size_t i = 0; i < family.size(); ++i)
    stacked.middleRows(static_cast<Eigen::Index>(i) * n, n) = Matrix::Identity(n, n) - family[i];
  const auto sv = Eigen::JacobiSVD<Matrix>(stacked).singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return true;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double rel = sv(i) / sv(0);
    if (rel > 1e-8 && rel < 1e-4) return false;
  }
  return true;
}

// Row-stochastic matrix with strictly positive entries.
inline Matrix random_stochastic(std::mt19937_64& rng, int m) {
  Matrix s(m, m);
  for (int i = 0; i < m; ++i) {
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      s(i, j) = 0.05 + projcons::uniform01(rng);
      sum += s(i, j);
    }
    s.row(i) /= sum;
  }
  return s;
}

inline projcons::Digraph random_self_arc_graph(std::mt19937_64& rng, int m, double arc_prob) {
  projcons::Digraph g = projcons::Digraph::self_loops(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && projcons::uniform01(rng) < arc_prob) g.add_arc(i, j);
  return g;
}

inline projcons::Digraph random_strongly_connected(std::mt19937_64& rng, int m, double extra_prob) {
  projcons::Digraph g = projcons::Digraph::ring(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && projcons::uniform01(rng) < extra_prob) g.add_arc(i, j);
  return g;
}

}  // namespace test_support
