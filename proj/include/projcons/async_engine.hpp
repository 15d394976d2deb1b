#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "projcons/graph.hpp"
#include "projcons/problem.hpp"
#include "projcons/rng.hpp"
#include "projcons/schedule.hpp"
#include "projcons/sync_engine.hpp"
#include "projcons/trace.hpp"

namespace projcons {

// Per-agent strictly increasing event times with gap bounds
// T_min_i <= t_{i,k+1} - t_{i,k} <= T_max_i.
struct EventSchedule {
  std::vector<std::vector<double>> times;
  std::vector<double> T_min;
  std::vector<double> T_max;

  int agent_count() const { return static_cast<int>(times.size()); }

  double max_gap_bound() const {
    double best = 0.0;
    for (double v : T_max) best = std::max(best, v);
    return best;
  }
};

// Seeded event times: first event uniform in [0, T_max_i], gaps uniform in
// [T_min_i, T_max_i], extended until the horizon is passed.
inline EventSchedule generate_event_schedule(int m, const std::vector<double>& t_min,
                                             const std::vector<double>& t_max, double horizon,
                                             std::uint64_t seed) {
  if (static_cast<int>(t_min.size()) != m || static_cast<int>(t_max.size()) != m)
    throw ContractViolation("generate_event_schedule: need one (T, T_bar) pair per agent");
  EventSchedule sched;
  sched.T_min = t_min;
  sched.T_max = t_max;
  sched.times.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    if (!(t_min[static_cast<std::size_t>(i)] > 0.0 &&
          t_min[static_cast<std::size_t>(i)] < t_max[static_cast<std::size_t>(i)]))
      throw ContractViolation("generate_event_schedule: need 0 < T < T_bar per agent");
    auto rng = make_rng(seed, kStreamEvents + static_cast<std::uint64_t>(i) * 0x10001ull);
    double t = uniform_range(rng, 0.0, t_max[static_cast<std::size_t>(i)]);
    auto& list = sched.times[static_cast<std::size_t>(i)];
    while (t <= horizon) {
      list.push_back(t);
      t += uniform_range(rng, t_min[static_cast<std::size_t>(i)], t_max[static_cast<std::size_t>(i)]);
    }
    if (list.empty()) list.push_back(t);  // degenerate horizon; keep one event
  }
  return sched;
}

// Merged timeline: the distinct event times >= t1 = max_i t_{i,1}, each with
// the set of agents firing there.  Exact time collisions collapse into one
// index at which all colliding agents read the same snapshot.
struct Timeline {
  std::vector<double> times;             // 1-based conceptually: times[p-1]
  std::vector<std::vector<int>> firing;  // agents with an event at t_p
  std::vector<double> first_event;       // each agent's t_{i,1}

  long length() const { return static_cast<long>(times.size()); }

  bool is_first_event(int agent, long p) const {
    return times[static_cast<std::size_t>(p - 1)] == first_event[static_cast<std::size_t>(agent)];
  }
};

inline Timeline build_timeline(const EventSchedule& sched) {
  Timeline tl;
  tl.first_event.reserve(sched.times.size());
  double t1 = 0.0;
  for (const auto& list : sched.times) {
    if (list.empty()) throw ContractViolation("build_timeline: every agent needs an event");
    for (std::size_t k = 1; k < list.size(); ++k)
      if (!(list[k] > list[k - 1]))
        throw ContractViolation("build_timeline: event times must be strictly increasing");
    tl.first_event.push_back(list.front());
    t1 = std::max(t1, list.front());
  }
  std::map<double, std::vector<int>> merged;
  for (std::size_t i = 0; i < sched.times.size(); ++i)
    for (double t : sched.times[i])
      if (t >= t1) merged[t].push_back(static_cast<int>(i));
  tl.times.reserve(merged.size());
  tl.firing.reserve(merged.size());
  for (auto& [t, agents] : merged) {
    tl.times.push_back(t);
    tl.firing.push_back(std::move(agents));
  }
  return tl;
}

// Extended neighbor graph at merged index p: an agent firing at t_p (past its
// first event) keeps its base in-arcs, everyone else keeps only its self-arc.
inline Digraph extended_neighbor_graph(const Timeline& tl, long p, const Digraph& base) {
  if (p < 1 || p > tl.length())
    throw ContractViolation("extended_neighbor_graph: p out of timeline range");
  const int m = base.vertex_count();
  Digraph g = Digraph::self_loops(m);
  for (int i : tl.firing[static_cast<std::size_t>(p - 1)]) {
    if (tl.is_first_event(i, p)) continue;
    for (int j : base.in_neighbors(i)) g.add_arc(j, i);
  }
  return g;
}

// Base graphs given as a schedule are sampled at the merged index.
inline Digraph extended_neighbor_graph(const Timeline& tl, long p, const GraphSchedule& base) {
  return extended_neighbor_graph(tl, p, base.at(p));
}

// Spanning check: the base graph's arcs are contained in the
// composition of the extended graphs over merged indices [a, b].
inline bool window_spanning_check(const Timeline& tl, const Digraph& base, long a, long b) {
  if (a < 1 || b > tl.length() || a > b)
    throw ContractViolation("window_spanning_check: bad index window");
  Digraph composed = extended_neighbor_graph(tl, a, base);
  for (long p = a + 1; p <= b; ++p)
    composed = compose(extended_neighbor_graph(tl, p, base), composed);
  return base.is_spanning_subgraph_of(composed);
}

struct AsyncOptions {
  long max_events = 100000;  // cap on merged timeline indices processed
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::optional<std::vector<Vector>> initial_states;
};

// Asynchronous run over the merged timeline.  At each t_p the firing agents
// (past their first events) update from the t_p snapshot with their base
// in-neighbors; idle agents hold.  Trace step p holds the states in force at
// t_p after the events there; with one common event grid the rule collapses
// to the synchronous iteration, and for a fixed base graph the traces match
// bit for bit.
inline Trace async_run(const Problem& problem, const GraphSchedule& base,
                       const EventSchedule& events, const AsyncOptions& options = {}) {
  if (options.max_events < 1) throw ContractViolation("async_run: max_events must be >= 1");
  if (base.vertex_count() != problem.m)
    throw ShapeError("async_run: base schedule size must match agent count");
  if (events.agent_count() != problem.m)
    throw ShapeError("async_run: event schedule size must match agent count");
  const Timeline tl = build_timeline(events);
  std::vector<Vector> states =
      options.initial_states ? *options.initial_states : init_states(problem, options.seed);

  Trace trace;
  const long limit = std::min(tl.length(), options.max_events);
  for (long p = 1; p <= limit; ++p) {
    detail::check_feasibility(problem, states);
    const Digraph base_graph = base.at(p);
    const std::vector<Vector> snapshot = states;
    for (int i : tl.firing[static_cast<std::size_t>(p - 1)]) {
      if (tl.is_first_event(i, p)) continue;
      states[static_cast<std::size_t>(i)] = detail::agent_update(
          problem.agents[static_cast<std::size_t>(i)], snapshot[static_cast<std::size_t>(i)],
          snapshot, base_graph.in_neighbors(i));
    }
    TraceStep step;
    step.t = p;
    step.states = states;
    step.disagreement = disagreement(states);
    step.residual = detail::residual_norm(problem, states);
    trace.steps.push_back(std::move(step));
    if (trace.steps.back().disagreement <= options.tol &&
        trace.steps.back().residual <= options.tol) {
      trace.converged = true;
      trace.converged_at = p;
      break;
    }
  }
  detail::finalize_trace(trace, problem);
  return trace;
}

}  // namespace projcons
