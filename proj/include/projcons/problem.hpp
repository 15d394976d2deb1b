#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "projcons/linalg.hpp"
#include "projcons/rng.hpp"

namespace projcons {

// The global equation A x = b split across m agents; agent i privately holds
// the block (A_i, b_i).  `solvable` refers to the stacked system; x_star is
// set when the solution is unique.
struct Problem {
  int m = 0;
  int n = 0;
  std::vector<AgentBlock> agents;
  bool solvable = false;
  std::optional<Vector> x_star;

  Matrix stacked_A() const {
    Eigen::Index rows = 0;
    for (const auto& ag : agents) rows += ag.A.rows();
    Matrix a(rows, n);
    Eigen::Index at = 0;
    for (const auto& ag : agents) {
      a.middleRows(at, ag.A.rows()) = ag.A;
      at += ag.A.rows();
    }
    return a;
  }

  Vector stacked_b() const {
    Eigen::Index rows = 0;
    for (const auto& ag : agents) rows += ag.b.size();
    Vector b(rows);
    Eigen::Index at = 0;
    for (const auto& ag : agents) {
      b.segment(at, ag.b.size()) = ag.b;
      at += ag.b.size();
    }
    return b;
  }

  std::vector<Matrix> projectors() const {
    std::vector<Matrix> out;
    out.reserve(agents.size());
    for (const auto& ag : agents) out.push_back(ag.P);
    return out;
  }

  // Builds agent blocks (projector + particular solution per agent) and
  // classifies the stacked system.  Throws InconsistentEquation if some
  // agent's private equation has no solution.
  static Problem from_blocks(const std::vector<std::pair<Matrix, Vector>>& blocks) {
    if (blocks.empty()) throw ContractViolation("Problem: need at least one agent block");
    Problem p;
    p.m = static_cast<int>(blocks.size());
    p.n = static_cast<int>(blocks.front().first.cols());
    for (const auto& [a, b] : blocks) {
      if (a.cols() != p.n) throw ShapeError("Problem: agent blocks must share the unknown dimension");
      p.agents.push_back(AgentBlock::from_equation(a, b));
    }
    const Matrix a = p.stacked_A();
    const Vector b = p.stacked_b();
    try {
      const Vector x = particular_solution(a, b);
      p.solvable = true;
      if (detail::rank_revealing_svd(a).rank == p.n) p.x_star = x;
    } catch (const InconsistentEquation&) {
      p.solvable = false;
    }
    return p;
  }
};

// Seeded random problem: entries uniform in [-1, 1].  When `solvable`, b is
// A times a random point; otherwise b is resampled until the stacked system
// is genuinely inconsistent (least-squares residual above 1e-6).
inline Problem generate_problem(int m, int n, const std::vector<int>& block_rows,
                                std::uint64_t seed, bool solvable = true) {
  if (static_cast<int>(block_rows.size()) != m)
    throw ContractViolation("generate_problem: block_rows must list one row count per agent");
  auto rng = make_rng(seed, kStreamProblem);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::Index total_rows = 0;
    for (int r : block_rows) {
      if (r < 0) throw ContractViolation("generate_problem: negative row count");
      total_rows += r;
    }
    Matrix a(total_rows, n);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = uniform_signed(rng);
    Vector b(total_rows);
    if (solvable) {
      Vector x(n);
      for (Eigen::Index j = 0; j < n; ++j) x(j) = uniform_signed(rng);
      b = a * x;
    } else {
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = uniform_signed(rng);
    }

    std::vector<std::pair<Matrix, Vector>> blocks;
    Eigen::Index at = 0;
    for (int r : block_rows) {
      blocks.emplace_back(a.middleRows(at, r), b.segment(at, r));
      at += r;
    }
    try {
      Problem p = Problem::from_blocks(blocks);
      if (p.solvable == solvable) {
        if (!solvable) {
          const Vector lsq = (a.transpose() * a).ldlt().solve(a.transpose() * b);
          if ((a * lsq - b).norm() < 1e-6) continue;  // nearly consistent; resample
        }
        return p;
      }
    } catch (const InconsistentEquation&) {
      // some agent's private equation unsolvable; resample
    }
  }
  throw ContractViolation("generate_problem: could not generate a problem with the requested shape");
}

}  // namespace projcons
