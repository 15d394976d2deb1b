#include <catch2/catch_amalgamated.hpp>

#include "projcons/async_engine.hpp"
#include "support.hpp"

using namespace projcons;

namespace {

// Every agent fires on the same deterministic unit grid.
EventSchedule common_grid(int m, int events) {
  EventSchedule sched;
  sched.T_min.assign(static_cast<std::size_t>(m), 0.9);
  sched.T_max.assign(static_cast<std::size_t>(m), 1.1);
  sched.times.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < events; ++k)
      sched.times[static_cast<std::size_t>(i)].push_back(static_cast<double>(k + 1));
  return sched;
}

}  // namespace

TEST_CASE("generate_event_schedule") {
  SECTION("deterministic per seed and gap bounds hold") {
    const auto a = generate_event_schedule(3, {0.5, 0.5, 0.5}, {1.7, 1.7, 1.7}, 100.0, 9);
    const auto b = generate_event_schedule(3, {0.5, 0.5, 0.5}, {1.7, 1.7, 1.7}, 100.0, 9);
    REQUIRE(a.times == b.times);
    for (int i = 0; i < 3; ++i) {
      const auto& list = a.times[static_cast<std::size_t>(i)];
      REQUIRE(list.front() <= 1.7);
      for (std::size_t k = 1; k < list.size(); ++k) {
        const double gap = list[k] - list[k - 1];
        REQUIRE(gap >= 0.5);
        REQUIRE(gap <= 1.7);
      }
    }
  }
  SECTION("near-degenerate gap range gives a near-periodic schedule") {
    const auto sched = generate_event_schedule(1, {0.999999}, {1.000001}, 50.0, 4);
    const auto& list = sched.times[0];
    for (std::size_t k = 1; k < list.size(); ++k)
      REQUIRE(list[k] - list[k - 1] == Catch::Approx(1.0).margin(1e-5));
  }
  SECTION("bad gap bounds are rejected") {
    REQUIRE_THROWS_AS(generate_event_schedule(1, {1.0}, {1.0}, 10.0, 1), ContractViolation);
    REQUIRE_THROWS_AS(generate_event_schedule(1, {2.0}, {1.0}, 10.0, 1), ContractViolation);
  }
}

TEST_CASE("build_timeline") {
  SECTION("merged times are distinct, increasing, and start at the last first-event") {
    const auto sched = generate_event_schedule(3, {0.5, 0.5, 0.5}, {1.7, 1.7, 1.7}, 60.0, 11);
    const Timeline tl = build_timeline(sched);
    double t1 = 0.0;
    for (const auto& list : sched.times) t1 = std::max(t1, list.front());
    REQUIRE(tl.times.front() == t1);
    for (std::size_t p = 1; p < tl.times.size(); ++p) REQUIRE(tl.times[p] > tl.times[p - 1]);
    std::size_t total = 0;
    for (const auto& list : sched.times)
      for (double t : list)
        if (t >= t1) ++total;
    std::size_t firing_total = 0;
    for (const auto& f : tl.firing) firing_total += f.size();
    REQUIRE(firing_total == total);
  }
  SECTION("exact collisions merge into one index") {
    EventSchedule sched = common_grid(3, 5);
    const Timeline tl = build_timeline(sched);
    REQUIRE(tl.length() == 5);
    for (const auto& firing : tl.firing) REQUIRE(firing.size() == 3);
  }
}

TEST_CASE("extended_neighbor_graph") {
  EventSchedule sched = common_grid(2, 4);
  sched.times[0] = {0.5, 2.0, 3.0, 4.0};  // agent 1 starts earlier
  sched.times[1] = {1.0, 2.0, 3.0, 4.0};
  const Timeline tl = build_timeline(sched);
  const Digraph base = Digraph::complete(2);

  SECTION("only agent 2 fires at t1; its event is its first, so self-arcs only") {
    REQUIRE(tl.times.front() == 1.0);
    const Digraph g = extended_neighbor_graph(tl, 1, base);
    REQUIRE(g == Digraph::self_loops(2));
  }
  SECTION("both agents fire past their first events: base graph restored") {
    const Digraph g = extended_neighbor_graph(tl, 2, base);
    REQUIRE(g == base);
  }
  SECTION("single firing agent keeps everyone else at self-arcs") {
    EventSchedule solo = common_grid(2, 3);
    solo.times[0] = {1.0, 1.5, 2.5};
    solo.times[1] = {1.0, 2.0, 3.0};
    const Timeline tl2 = build_timeline(solo);
    // at t = 1.5 only agent 1 (index 0) fires, past its first event
    REQUIRE(tl2.times[1] == 1.5);
    const Digraph g = extended_neighbor_graph(tl2, 2, base);
    REQUIRE(g.has_arc(0, 0));
    REQUIRE(g.has_arc(1, 1));
    REQUIRE(g.has_arc(1, 0));
    REQUIRE_FALSE(g.has_arc(0, 1));
  }
}

TEST_CASE("async_run") {
  SECTION("common event grid reduces to the synchronous run bitwise") {
    for (std::uint64_t seed : {1ull, 2ull}) {
      auto prob = generate_problem(3, 3, {1, 1, 1}, seed, true);
      const Digraph base = Digraph::ring(3);
      const auto sync_trace = run_sync(prob, GraphSchedule::fixed(base),
                                       {.max_steps = 200, .tol = 1e-9, .seed = seed});
      const auto async_trace =
          async_run(prob, GraphSchedule::fixed(base), common_grid(3, 200),
                    {.max_events = 200, .tol = 1e-9, .seed = seed});
      REQUIRE(async_trace.steps.size() == sync_trace.steps.size());
      for (std::size_t s = 0; s < sync_trace.steps.size(); ++s)
        for (int i = 0; i < 3; ++i)
          REQUIRE(async_trace.steps[s].states[i] == sync_trace.steps[s].states[i]);
      REQUIRE(async_trace.converged == sync_trace.converged);
      REQUIRE(async_trace.converged_at == sync_trace.converged_at);
    }
  }
  SECTION("fixed strongly connected base with bounded gaps converges") {
    auto prob = generate_problem(3, 3, {1, 1, 1}, 5, true);
    const auto events = generate_event_schedule(3, {0.5, 0.5, 0.5}, {1.7, 1.7, 1.7}, 900.0, 5);
    const auto trace = async_run(prob, GraphSchedule::fixed(Digraph::ring(3)), events,
                                 {.max_events = 2000, .tol = 1e-9, .seed = 5});
    REQUIRE(trace.converged);
    REQUIRE(trace.final_step().residual <= 1e-8);
  }
  SECTION("a sluggish agent slows convergence but does not break it") {
    auto prob = generate_problem(3, 3, {1, 1, 1}, 9, true);
    const auto balanced = generate_event_schedule(3, {0.5, 0.5, 0.5}, {1.0, 1.0, 1.0}, 600.0, 9);
    const auto skewed = generate_event_schedule(3, {0.5, 0.5, 0.5}, {1.0, 1.0, 4.0}, 600.0, 9);
    const auto fast = async_run(prob, GraphSchedule::fixed(Digraph::ring(3)), balanced,
                                {.max_events = 8000, .tol = 1e-9, .seed = 9});
    const auto slow = async_run(prob, GraphSchedule::fixed(Digraph::ring(3)), skewed,
                                {.max_events = 8000, .tol = 1e-9, .seed = 9});
    REQUIRE(fast.converged);
    REQUIRE(slow.converged);
    REQUIRE(*slow.converged_at > *fast.converged_at);
  }
  SECTION("feasibility holds along the asynchronous run") {
    auto prob = generate_problem(3, 4, {2, 1, 1}, 8, true);
    const auto events = generate_event_schedule(3, {0.5, 0.5, 0.5}, {1.7, 1.7, 1.7}, 120.0, 8);
    const auto trace = async_run(prob, GraphSchedule::fixed(Digraph::complete(3)), events,
                                 {.max_events = 400, .tol = 0.0, .seed = 8});
    for (const auto& step : trace.steps)
      for (int i = 0; i < prob.m; ++i)
        REQUIRE(prob.agents[i].feasibility_residual(step.states[i]) <=
                1e-8 * (1.0 + prob.agents[i].b.norm()));
  }
}

TEST_CASE("window_spanning_check") {
  const Digraph base = Digraph::ring(3);
  const auto events = generate_event_schedule(3, {0.5, 0.5, 0.5}, {1.7, 1.7, 1.7}, 200.0, 21);
  const Timeline tl = build_timeline(events);
  const double t_bar = events.max_gap_bound();

  SECTION("windows spanning at least max gap always contain the base graph") {
    for (long a = 1; a + 1 <= tl.length(); a += 7) {
      long b = a;
      while (b < tl.length() && tl.times[static_cast<std::size_t>(b - 1)] -
                                        tl.times[static_cast<std::size_t>(a - 1)] <
                                    t_bar)
        ++b;
      if (tl.times[static_cast<std::size_t>(b - 1)] - tl.times[static_cast<std::size_t>(a - 1)] <
          t_bar)
        break;
      REQUIRE(window_spanning_check(tl, base, a, b));
    }
  }
  SECTION("a single event index cannot span a complete base") {
    EventSchedule solo = common_grid(2, 3);
    solo.times[0] = {1.0, 1.5, 2.5};
    solo.times[1] = {1.0, 2.0, 3.0};
    const Timeline tl2 = build_timeline(solo);
    REQUIRE_FALSE(window_spanning_check(tl2, Digraph::complete(2), 2, 2));
  }
  SECTION("self-loop base is always spanned") {
    REQUIRE(window_spanning_check(tl, Digraph::self_loops(3), 1, 1));
  }
  SECTION("every m*q consecutive merged times span at least the max gap bound") {
    // q is the least integer with T_max <= q T_min
    const double t_min = 0.5;
    const long q = static_cast<long>(std::ceil(t_bar / t_min));
    const long mq = 3 * q;
    for (long a = 1; a + mq <= tl.length(); ++a)
      REQUIRE(tl.times[static_cast<std::size_t>(a + mq - 1)] -
                  tl.times[static_cast<std::size_t>(a - 1)] >=
              t_bar);
  }
}
