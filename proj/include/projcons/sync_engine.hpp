#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "projcons/block_matrix.hpp"
#include "projcons/graph.hpp"
#include "projcons/problem.hpp"
#include "projcons/rng.hpp"
#include "projcons/schedule.hpp"
#include "projcons/trace.hpp"

namespace projcons {

inline constexpr double kFeasibilityTol = 1e-8;

namespace detail {

// x_i - (1/k) P_i (k x_i - sum of neighbor states).  Both engines route
// through this kernel so that the async run with a common event grid is
// bitwise identical to the sync run.
inline Vector agent_update(const AgentBlock& agent, const Vector& x_i,
                           const std::vector<Vector>& snapshot,
                           const std::vector<int>& neighbors) {
  const double k = static_cast<double>(neighbors.size());
  Vector sum = Vector::Zero(x_i.size());
  for (int j : neighbors) sum += snapshot[static_cast<std::size_t>(j)];
  return x_i - (1.0 / k) * (agent.P * (k * x_i - sum));
}

inline void check_feasibility(const Problem& problem, const std::vector<Vector>& states) {
  for (int i = 0; i < problem.m; ++i) {
    const auto& ag = problem.agents[static_cast<std::size_t>(i)];
    if (ag.feasibility_residual(states[static_cast<std::size_t>(i)]) >
        kFeasibilityTol * (1.0 + ag.b.norm()))
      throw FeasibilityDrift("agent " + std::to_string(i + 1) +
                             " no longer satisfies its private equation");
  }
}

}  // namespace detail

// Initial estimates x_i(1) = z_i + K_i u_i with u_i seeded uniform in [-1, 1];
// each satisfies the agent's private equation.  Deterministic per seed.
inline std::vector<Vector> init_states(const Problem& problem, std::uint64_t seed) {
  auto rng = make_rng(seed, kStreamInit);
  std::vector<Vector> states;
  states.reserve(static_cast<std::size_t>(problem.m));
  for (const auto& ag : problem.agents) {
    const Matrix kernel = kernel_basis(ag.A);
    Vector u(kernel.cols());
    for (Eigen::Index c = 0; c < u.size(); ++c) u(c) = uniform_signed(rng);
    states.push_back(ag.z + kernel * u);
  }
  return states;
}

// One synchronous step of the projection-consensus rule over neighbor graph g:
// x_i+ = x_i - (1/m_i) P_i (m_i x_i - sum_{j in N_i} x_j).
inline std::vector<Vector> sync_step(const std::vector<Vector>& states, const Digraph& g,
                                     const Problem& problem) {
  if (g.vertex_count() != problem.m) throw ShapeError("sync_step: graph size must match agent count");
  if (!g.has_all_self_arcs()) throw ContractViolation("sync_step: neighbor graph needs self-arcs");
  detail::check_feasibility(problem, states);
  std::vector<Vector> next(states.size());
  for (int i = 0; i < problem.m; ++i)
    next[static_cast<std::size_t>(i)] =
        detail::agent_update(problem.agents[static_cast<std::size_t>(i)],
                             states[static_cast<std::size_t>(i)], states, g.in_neighbors(i));
  return next;
}

// Convex-combination variant: x_i+ = x_i - P_i (x_i - sum_j W_ij x_j).
// W must be row-stochastic with positive entries exactly on the arcs of g
// (one scalar weight per neighbor, applied to the whole state vector).
inline std::vector<Vector> weighted_step(const std::vector<Vector>& states, const Digraph& g,
                                         const Matrix& w, const Problem& problem) {
  if (g.vertex_count() != problem.m) throw ShapeError("weighted_step: graph size mismatch");
  if (w.rows() != problem.m || w.cols() != problem.m)
    throw ShapeError("weighted_step: W must be m x m");
  if (!g.has_all_self_arcs()) throw ContractViolation("weighted_step: neighbor graph needs self-arcs");
  for (int i = 0; i < problem.m; ++i) {
    if (std::abs(w.row(i).sum() - 1.0) > 1e-12)
      throw ContractViolation("weighted_step: W rows must sum to 1");
    for (int j = 0; j < problem.m; ++j) {
      if (g.has_arc(j, i)) {
        if (!(w(i, j) > 0.0))
          throw ContractViolation("weighted_step: weights on arcs must be positive");
      } else if (w(i, j) != 0.0) {
        throw ContractViolation("weighted_step: nonzero weight off the graph support");
      }
    }
  }
  detail::check_feasibility(problem, states);
  std::vector<Vector> next(states.size());
  for (int i = 0; i < problem.m; ++i) {
    Vector mix = Vector::Zero(problem.n);
    for (int j = 0; j < problem.m; ++j)
      if (w(i, j) != 0.0) mix += w(i, j) * states[static_cast<std::size_t>(j)];
    const auto& ag = problem.agents[static_cast<std::size_t>(i)];
    next[static_cast<std::size_t>(i)] =
        states[static_cast<std::size_t>(i)] - ag.P * (states[static_cast<std::size_t>(i)] - mix);
  }
  return next;
}

// Error-dynamics transition e(t+1) = P (F kron I) P e(t) for a flocking
// matrix F; identical to sandwich(projectors, F).
inline BlockMatrix error_transition(const std::vector<Matrix>& projectors, const Matrix& f) {
  return sandwich(projectors, f);
}

struct SyncOptions {
  long max_steps = 100000;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::optional<std::vector<Vector>> initial_states;
};

namespace detail {

inline double residual_norm(const Problem& problem, const std::vector<Vector>& states) {
  const Vector avg = agent_average(states);
  return (problem.stacked_A() * avg - problem.stacked_b()).norm();
}

// Errors are filled in after the run: against x_star when the solution is
// unique, otherwise against the final consensus point.
inline void finalize_trace(Trace& trace, const Problem& problem) {
  const Vector ref = problem.x_star ? *problem.x_star : agent_average(trace.final_step().states);
  for (auto& step : trace.steps) {
    step.per_agent_error.resize(step.states.size());
    for (std::size_t i = 0; i < step.states.size(); ++i)
      step.per_agent_error[i] = (step.states[i] - ref).norm();
  }
  const LineFit fit = fit_log_decay(trace);
  if (fit.points >= 2) trace.empirical_rate = fit.slope;
}

}  // namespace detail

// Runs the synchronous engine until disagreement and residual both fall
// below tol, or max_steps is reached.  The trace starts at t = 1 with the
// initial states.
inline Trace run_sync(const Problem& problem, const GraphSchedule& sched,
                      const SyncOptions& options = {}) {
  if (options.max_steps < 1) throw ContractViolation("run_sync: max_steps must be >= 1");
  std::vector<Vector> states =
      options.initial_states ? *options.initial_states : init_states(problem, options.seed);
  Trace trace;
  auto record = [&](long t) {
    TraceStep step;
    step.t = t;
    step.states = states;
    step.disagreement = disagreement(states);
    step.residual = detail::residual_norm(problem, states);
    trace.steps.push_back(std::move(step));
    if (!trace.converged && trace.steps.back().disagreement <= options.tol &&
        trace.steps.back().residual <= options.tol) {
      trace.converged = true;
      trace.converged_at = t;
    }
    return trace.converged;
  };

  if (!record(1)) {
    for (long t = 1; t < options.max_steps; ++t) {
      states = sync_step(states, sched.at(t), problem);
      if (record(t + 1)) break;
    }
  }
  detail::finalize_trace(trace, problem);
  return trace;
}

}  // namespace projcons
