#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "projcons/graph.hpp"
#include "projcons/linalg.hpp"
#include "projcons/schedule.hpp"
#include "projcons/trace.hpp"

namespace projcons {

// Time-varying square system A(t) x = b(t), t >= 1, with rows partitioned
// across agents.  Each agent block must keep full row rank along the run:
// det(A_i A_i') stays above det_floor.
struct TimeVaryingProblem {
  int m = 0;
  int n = 0;
  std::vector<int> block_rows;
  std::function<Matrix(long)> A;
  std::function<Vector(long)> b;
  double det_floor = 1e-6;

  Eigen::Index row_offset(int agent) const {
    Eigen::Index at = 0;
    for (int i = 0; i < agent; ++i) at += block_rows[static_cast<std::size_t>(i)];
    return at;
  }

  Matrix agent_A(int agent, long t) const {
    return A(t).middleRows(row_offset(agent), block_rows[static_cast<std::size_t>(agent)]);
  }

  Vector agent_b(int agent, long t) const {
    return b(t).segment(row_offset(agent), block_rows[static_cast<std::size_t>(agent)]);
  }
};

// A(t) = A0 + sin(omega_A (t-1)) dA, b(t) = b0 + sin(omega_b (t-1)) db.
struct SinusoidalData {
  Matrix A0, dA;
  double omega_A = 0.0;
  Vector b0, db;
  double omega_b = 0.0;
};

inline TimeVaryingProblem make_sinusoidal_problem(const SinusoidalData& data,
                                                  const std::vector<int>& block_rows,
                                                  double det_floor = 1e-6) {
  if (data.A0.rows() != data.A0.cols()) throw ShapeError("tracking: A(t) must be square");
  TimeVaryingProblem tvp;
  tvp.m = static_cast<int>(block_rows.size());
  tvp.n = static_cast<int>(data.A0.cols());
  tvp.block_rows = block_rows;
  tvp.det_floor = det_floor;
  int total = 0;
  for (int r : block_rows) total += r;
  if (total != tvp.n) throw ShapeError("tracking: block rows must partition all n rows");
  tvp.A = [data](long t) {
    return Matrix(data.A0 + std::sin(data.omega_A * static_cast<double>(t - 1)) * data.dA);
  };
  tvp.b = [data](long t) {
    return Vector(data.b0 + std::sin(data.omega_b * static_cast<double>(t - 1)) * data.db);
  };
  return tvp;
}

namespace detail {

struct AgentSnapshot {
  Matrix P;  // projector onto ker A_i(t+1)
  Vector z;  // min-norm solution of A_i(t+1) x = b_i(t+1)
};

inline AgentSnapshot tracking_agent_data(const TimeVaryingProblem& tvp, int agent, long t_next) {
  const Matrix a = tvp.agent_A(agent, t_next);
  const Vector b = tvp.agent_b(agent, t_next);
  const Matrix gram = a * a.transpose();
  if (std::abs(gram.determinant()) < tvp.det_floor)
    throw RankError("tracking: det(A_i A_i') fell below the configured floor");
  const Matrix gram_inv = gram.inverse();
  AgentSnapshot snap;
  snap.z = a.transpose() * (gram_inv * b);
  Matrix p = Matrix::Identity(tvp.n, tvp.n) - a.transpose() * gram_inv * a;
  snap.P = 0.5 * (p + p.transpose());
  return snap;
}

}  // namespace detail

// One tracking step: each agent recomputes z_i and P_i from (A_i(t+1),
// b_i(t+1)) and moves to
//   x_i(t+1) = z_i - (1/m_i) P_i (m_i z_i - sum_{j in N_i} x_j(t)),
// which satisfies A_i(t+1) x_i(t+1) = b_i(t+1) by construction.
inline std::vector<Vector> tracking_step(const std::vector<Vector>& states, const Digraph& g,
                                         const TimeVaryingProblem& tvp, long t) {
  if (g.vertex_count() != tvp.m) throw ShapeError("tracking_step: graph size mismatch");
  if (!g.has_all_self_arcs())
    throw ContractViolation("tracking_step: neighbor graph needs self-arcs");
  std::vector<Vector> next(states.size());
  for (int i = 0; i < tvp.m; ++i) {
    const auto snap = detail::tracking_agent_data(tvp, i, t + 1);
    const auto neighbors = g.in_neighbors(i);
    const double k = static_cast<double>(neighbors.size());
    Vector sum = Vector::Zero(tvp.n);
    for (int j : neighbors) sum += states[static_cast<std::size_t>(j)];
    next[static_cast<std::size_t>(i)] = snap.z - (1.0 / k) * (snap.P * (k * snap.z - sum));
  }
  return next;
}

inline Vector true_solution(const TimeVaryingProblem& tvp, long t) {
  Eigen::FullPivLU<Matrix> lu(tvp.A(t));
  if (!lu.isInvertible()) throw RankError("tracking: A(t) is singular");
  return lu.solve(tvp.b(t));
}

// |column(e_1 .. e_m)|_2 with e_i = x_i - x*(t).
inline double tracking_error(const std::vector<Vector>& states, const TimeVaryingProblem& tvp,
                             long t) {
  const Vector star = true_solution(tvp, t);
  double sq = 0.0;
  for (const auto& x : states) sq += (x - star).squaredNorm();
  return std::sqrt(sq);
}

// Diagnostic drift term delta(t) = dA(t) A(t)^-1 b(t) - A(t+1)^-1 db(t).
inline Vector delta_diagnostic(const TimeVaryingProblem& tvp, long t) {
  const Matrix da = tvp.A(t + 1) - tvp.A(t);
  const Vector db = tvp.b(t + 1) - tvp.b(t);
  return da * true_solution(tvp, t) - tvp.A(t + 1).fullPivLu().solve(db);
}

// Runs the tracking engine for `horizon` steps.  Initial states default to
// each agent's min-norm solution of A_i(1) x = b_i(1).  Trace errors are
// measured against x*(t) per step.
inline Trace run_tracking(const TimeVaryingProblem& tvp, const GraphSchedule& sched, long horizon,
                          const std::optional<std::vector<Vector>>& initial_states = {}) {
  if (horizon < 1) throw ContractViolation("run_tracking: horizon must be >= 1");
  std::vector<Vector> states;
  if (initial_states) {
    states = *initial_states;
    if (static_cast<int>(states.size()) != tvp.m)
      throw ShapeError("run_tracking: need one initial state per agent");
  } else {
    for (int i = 0; i < tvp.m; ++i)
      states.push_back(particular_solution(tvp.agent_A(i, 1), tvp.agent_b(i, 1)));
  }

  Trace trace;
  auto record = [&](long t) {
    TraceStep step;
    step.t = t;
    step.states = states;
    const Vector star = true_solution(tvp, t);
    step.per_agent_error.reserve(states.size());
    for (const auto& x : states) step.per_agent_error.push_back((x - star).norm());
    step.disagreement = disagreement(states);
    step.residual = (tvp.A(t) * agent_average(states) - tvp.b(t)).norm();
    trace.steps.push_back(std::move(step));
  };

  record(1);
  for (long t = 1; t < horizon; ++t) {
    states = tracking_step(states, sched.at(t), tvp, t);
    record(t + 1);
  }
  const LineFit fit = fit_log_decay(trace);
  if (fit.points >= 2) trace.empirical_rate = fit.slope;
  return trace;
}

}  // namespace projcons
