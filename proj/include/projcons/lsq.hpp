#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "projcons/linalg.hpp"
#include "projcons/problem.hpp"
#include "projcons/schedule.hpp"
#include "projcons/sync_engine.hpp"

namespace projcons {

// Oriented spanning tree on m vertices; edge (tail, head) puts +1 at the tail
// row and -1 at the head row of its incidence column.
struct TreeTopology {
  int m = 0;
  std::vector<std::pair<int, int>> edges;

  static TreeTopology path(int m) {
    TreeTopology t;
    t.m = m;
    for (int i = 0; i + 1 < m; ++i) t.edges.emplace_back(i, i + 1);
    return t;
  }

  static TreeTopology star(int m, int center = 0) {
    TreeTopology t;
    t.m = m;
    for (int i = 0; i < m; ++i)
      if (i != center) t.edges.emplace_back(i, center);
    return t;
  }
};

// Incidence matrix H (m x (m-1)); columns sum to zero and rank is m-1.
// Throws unless the edges form a spanning tree.
inline Matrix incidence(const TreeTopology& tree) {
  const int m = tree.m;
  if (m < 2) throw ContractViolation("incidence: a spanning tree needs at least two vertices");
  if (static_cast<int>(tree.edges.size()) != m - 1)
    throw ContractViolation("incidence: a spanning tree on m vertices has m-1 edges");
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
    return v;
  };
  Matrix h = Matrix::Zero(m, m - 1);
  for (std::size_t e = 0; e < tree.edges.size(); ++e) {
    const auto [tail, head] = tree.edges[e];
    if (tail < 0 || tail >= m || head < 0 || head >= m || tail == head)
      throw ContractViolation("incidence: bad edge endpoints");
    const int a = find(tail), b = find(head);
    if (a == b) throw ContractViolation("incidence: edge set contains a cycle");
    parent[static_cast<std::size_t>(a)] = b;
    h(tail, static_cast<Eigen::Index>(e)) = 1.0;
    h(head, static_cast<Eigen::Index>(e)) = -1.0;
  }
  return h;
}

// State augmentation for distributed least squares: agent i's equation
// becomes [A_i' A_i | h_i kron I_n] x_bar = A_i' b_i over the nm-dimensional
// augmented unknown.  The stacked augmented system is nonsingular; the first
// n coordinates of its solution solve A'A x = A'b.  Each A_i must have full
// column rank.
inline Problem augment(const Problem& problem, const TreeTopology& tree) {
  if (tree.m != problem.m) throw ShapeError("augment: tree size must match agent count");
  const int n = problem.n;
  const Matrix h = incidence(tree);
  std::vector<std::pair<Matrix, Vector>> blocks;
  blocks.reserve(static_cast<std::size_t>(problem.m));
  for (int i = 0; i < problem.m; ++i) {
    const auto& ag = problem.agents[static_cast<std::size_t>(i)];
    if (detail::rank_revealing_svd(ag.A).rank != n)
      throw RankError("augment: agent " + std::to_string(i + 1) + " lacks full column rank");
    Matrix c = Matrix::Zero(n, static_cast<Eigen::Index>(n) * problem.m);
    c.leftCols(n) = ag.A.transpose() * ag.A;
    for (int e = 0; e + 1 < problem.m; ++e)
      if (h(i, e) != 0.0)
        c.middleCols(static_cast<Eigen::Index>(n) * (e + 1), n) =
            h(i, e) * Matrix::Identity(n, n);
    blocks.emplace_back(std::move(c), ag.A.transpose() * ag.b);
  }
  return Problem::from_blocks(blocks);
}

// Direct dense solve of A'A x = A'b; the independent reference the
// distributed solver is checked against.
inline Vector normal_equations_oracle(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) throw ShapeError("normal_equations_oracle: shape mismatch");
  if (detail::rank_revealing_svd(a).rank != a.cols())
    throw RankError("normal_equations_oracle: A must have full column rank");
  return (a.transpose() * a).ldlt().solve(a.transpose() * b);
}

struct LsqResult {
  Vector x_hat;
  Trace trace;
};

// Runs the synchronous engine on the tree-augmented problem and extracts the
// least-squares estimate from the first n coordinates of the consensus point.
inline LsqResult solve_lsq(const Problem& problem, const TreeTopology& tree,
                           const GraphSchedule& sched, const SyncOptions& options = {}) {
  const Problem augmented = augment(problem, tree);
  LsqResult result{Vector(), run_sync(augmented, sched, options)};
  result.x_hat = agent_average(result.trace.final_step().states).head(problem.n);
  return result;
}

}  // namespace projcons
