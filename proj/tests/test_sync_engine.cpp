#include <catch2/catch_amalgamated.hpp>

#include "projcons/sync_engine.hpp"
#include "support.hpp"

using namespace projcons;

namespace {

Problem two_agent_axes() {
  return Problem::from_blocks({{Matrix{{1.0, 0.0}}, Vector{{1.0}}},
                               {Matrix{{0.0, 1.0}}, Vector{{2.0}}}});
}

}  // namespace

TEST_CASE("init_states") {
  SECTION("identity blocks pin the state to b") {
    const Problem p = Problem::from_blocks({{Matrix::Identity(2, 2), Vector{{3.0, 4.0}}},
                                            {Matrix::Identity(2, 2), Vector{{3.0, 4.0}}}});
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
      const auto states = init_states(p, seed);
      REQUIRE((states[0] - Vector{{3.0, 4.0}}).norm() <= 1e-12);
      REQUIRE((states[1] - Vector{{3.0, 4.0}}).norm() <= 1e-12);
    }
  }
  SECTION("constrained coordinate is fixed, free coordinate is seeded") {
    const Problem p = Problem::from_blocks({{Matrix{{1.0, 0.0}}, Vector{{1.0}}}});
    const auto states = init_states(p, 5);
    REQUIRE(states[0](0) == Catch::Approx(1.0).margin(1e-12));
    const auto again = init_states(p, 5);
    REQUIRE(states[0] == again[0]);  // bitwise determinism
    const auto other = init_states(p, 6);
    REQUIRE(states[0](1) != other[0](1));
  }
  SECTION("every initial state satisfies its private equation") {
    auto prob = generate_problem(4, 5, {2, 1, 1, 1}, 42, true);
    const auto states = init_states(prob, 3);
    for (int i = 0; i < prob.m; ++i)
      REQUIRE(prob.agents[i].feasibility_residual(states[i]) <=
              1e-9 * (1.0 + prob.agents[i].b.norm()));
    // a unique solution satisfies every private equation
    REQUIRE(prob.x_star.has_value());
    for (int i = 0; i < prob.m; ++i)
      REQUIRE(prob.agents[i].feasibility_residual(*prob.x_star) <=
              1e-9 * (1.0 + prob.agents[i].b.norm()));
  }
  SECTION("inconsistent private equation is rejected at problem construction") {
    REQUIRE_THROWS_AS(
        Problem::from_blocks({{Matrix{{1.0, 0.0}, {1.0, 0.0}}, Vector{{1.0, 2.0}}}}),
        InconsistentEquation);
  }
}

TEST_CASE("sync_step") {
  SECTION("worked two-agent example") {
    const Problem p = two_agent_axes();
    const std::vector<Vector> x{Vector{{1.0, 0.0}}, Vector{{0.0, 2.0}}};
    const auto next = sync_step(x, Digraph::complete(2), p);
    REQUIRE((next[0] - Vector{{1.0, 1.0}}).norm() <= 1e-15);
    REQUIRE((next[1] - Vector{{0.5, 2.0}}).norm() <= 1e-15);
  }
  SECTION("consensus on a common solution is a fixed point") {
    const Problem p = two_agent_axes();
    const Vector sol{{1.0, 2.0}};
    const std::vector<Vector> x{sol, sol};
    const auto next = sync_step(x, Digraph::complete(2), p);
    REQUIRE((next[0] - sol).norm() <= 1e-15);
    REQUIRE((next[1] - sol).norm() <= 1e-15);
  }
  SECTION("single agent never moves") {
    const Problem p = Problem::from_blocks({{Matrix{{1.0, 1.0}}, Vector{{2.0}}}});
    const auto x0 = init_states(p, 9);
    const auto next = sync_step(x0, Digraph::self_loops(1), p);
    REQUIRE((next[0] - x0[0]).norm() <= 1e-15);
  }
  SECTION("infeasible input states are detected") {
    const Problem p = two_agent_axes();
    const std::vector<Vector> bad{Vector{{0.0, 0.0}}, Vector{{0.0, 2.0}}};
    REQUIRE_THROWS_AS(sync_step(bad, Digraph::complete(2), p), FeasibilityDrift);
  }
}

TEST_CASE("weighted_step") {
  const Problem p = two_agent_axes();
  const std::vector<Vector> x{Vector{{1.0, 0.0}}, Vector{{0.0, 2.0}}};
  const Digraph g = Digraph::complete(2);

  SECTION("flocking weights reduce to the straight-average rule") {
    const auto a = weighted_step(x, g, flocking_matrix(g), p);
    const auto b = sync_step(x, g, p);
    REQUIRE((a[0] - b[0]).norm() <= 1e-14);
    REQUIRE((a[1] - b[1]).norm() <= 1e-14);
  }
  SECTION("identity weights hold the states") {
    const Digraph self = Digraph::self_loops(2);
    const auto next = weighted_step(x, self, Matrix::Identity(2, 2), p);
    REQUIRE((next[0] - x[0]).norm() <= 1e-15);
    REQUIRE((next[1] - x[1]).norm() <= 1e-15);
  }
  SECTION("worked convex-combination example") {
    const Matrix w{{0.75, 0.25}, {0.25, 0.75}};
    const auto next = weighted_step(x, g, w, p);
    REQUIRE((next[0] - Vector{{1.0, 0.5}}).norm() <= 1e-15);
  }
  SECTION("contract violations") {
    REQUIRE_THROWS_AS(weighted_step(x, g, Matrix{{0.8, 0.3}, {0.25, 0.75}}, p),
                      ContractViolation);  // rows do not sum to 1
    REQUIRE_THROWS_AS(weighted_step(x, g, Matrix{{1.0, 0.0}, {0.25, 0.75}}, p),
                      ContractViolation);  // zero weight on an arc of g
    Digraph sparse = Digraph::self_loops(2);
    sparse.add_arc(0, 1);
    REQUIRE_THROWS_AS(weighted_step(x, sparse, Matrix{{0.75, 0.25}, {0.25, 0.75}}, p),
                      ContractViolation);  // support mismatch
  }
}

TEST_CASE("error_transition") {
  SECTION("identity projectors lift the flocking matrix") {
    const std::vector<Matrix> eye{Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    const Matrix f = flocking_matrix(Digraph::complete(2));
    REQUIRE((error_transition(eye, f).data - kron_lift(f, 2).data).norm() <= 1e-15);
  }
  SECTION("identity flocking matrix gives the bare projector diagonal") {
    const Problem p = two_agent_axes();
    const BlockMatrix m = error_transition(p.projectors(), Matrix::Identity(2, 2));
    REQUIRE((m.data - block_diagonal(p.projectors()).data).norm() <= 1e-15);
  }
  SECTION("error recursion matches the state recursion") {
    const Problem p = two_agent_axes();
    const Vector star{{1.0, 2.0}};
    const std::vector<Vector> x{Vector{{1.0, 0.0}}, Vector{{0.0, 2.0}}};
    Vector e(4);
    e << x[0] - star, x[1] - star;
    REQUIRE((e - Vector{{0.0, -2.0, -1.0, 0.0}}).norm() <= 1e-15);
    const BlockMatrix m = error_transition(p.projectors(), flocking_matrix(Digraph::complete(2)));
    const Vector e_next = m.data * e;
    REQUIRE((e_next - Vector{{0.0, -1.0, -0.5, 0.0}}).norm() <= 1e-15);
    const auto x_next = sync_step(x, Digraph::complete(2), p);
    Vector e_direct(4);
    e_direct << x_next[0] - star, x_next[1] - star;
    REQUIRE((e_next - e_direct).norm() <= 1e-10);
  }
  SECTION("equivalence on random problems and graphs") {
    auto rng = make_rng(401);
    for (int trial = 0; trial < 20; ++trial) {
      auto prob = generate_problem(3, 3, {1, 1, 1}, 500 + trial, true);
      const Digraph g = test_support::random_self_arc_graph(rng, 3, 0.5);
      auto states = init_states(prob, trial);
      const Vector star = *prob.x_star;
      Vector e(9);
      for (int i = 0; i < 3; ++i) e.segment(3 * i, 3) = states[i] - star;
      const auto next = sync_step(states, g, prob);
      Vector e_direct(9);
      for (int i = 0; i < 3; ++i) e_direct.segment(3 * i, 3) = next[i] - star;
      const BlockMatrix m = error_transition(prob.projectors(), flocking_matrix(g));
      REQUIRE((m.data * e - e_direct).norm() <= 1e-10);
    }
  }
}

TEST_CASE("run_sync") {
  SECTION("fixed complete graph on a unique-solution problem") {
    auto prob = generate_problem(3, 3, {1, 1, 1}, 2, true);
    const auto trace = run_sync(prob, GraphSchedule::fixed(Digraph::complete(3)),
                                {.max_steps = 20000, .tol = 1e-9, .seed = 1});
    REQUIRE(trace.converged);
    REQUIRE(trace.final_step().residual <= 1e-9);
    REQUIRE(trace.final_step().disagreement <= 1e-9);
    REQUIRE(trace.empirical_rate.has_value());
    REQUIRE(*trace.empirical_rate < 0.0);
  }
  SECTION("single agent converges immediately") {
    const Problem p = Problem::from_blocks({{Matrix::Identity(2, 2), Vector{{1.0, 1.0}}}});
    const auto trace = run_sync(p, GraphSchedule::fixed(Digraph::self_loops(1)), {});
    REQUIRE(trace.converged);
    REQUIRE(*trace.converged_at == 1);
  }
  SECTION("feasibility invariance along a run") {
    auto prob = generate_problem(3, 4, {2, 1, 1}, 6, true);
    const auto sched = GraphSchedule::seeded_random(3, 17, 3);
    const auto trace = run_sync(prob, sched, {.max_steps = 400, .tol = 0.0, .seed = 2});
    for (const auto& step : trace.steps)
      for (int i = 0; i < prob.m; ++i)
        REQUIRE(prob.agents[i].feasibility_residual(step.states[i]) <=
                1e-8 * (1.0 + prob.agents[i].b.norm()));
  }
  SECTION("same seed reruns bitwise identically") {
    auto prob = generate_problem(3, 4, {2, 1, 1}, 8, true);
    const auto sched = GraphSchedule::seeded_random(3, 21, 3);
    const auto a = run_sync(prob, sched, {.max_steps = 300, .tol = 1e-9, .seed = 7});
    const auto b = run_sync(prob, sched, {.max_steps = 300, .tol = 1e-9, .seed = 7});
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t s = 0; s < a.steps.size(); ++s)
      for (int i = 0; i < prob.m; ++i) REQUIRE(a.steps[s].states[i] == b.steps[s].states[i]);
  }
  SECTION("mixed norm of every emitted transition is at most one") {
    auto prob = generate_problem(3, 4, {2, 1, 1}, 9, true);
    const auto sched = GraphSchedule::seeded_random(3, 23, 3);
    for (long t = 1; t <= 40; ++t)
      REQUIRE(mixed_norm(error_transition(prob.projectors(), flocking_matrix(sched.at(t)))) <=
              1.0 + 1e-9);
  }
  SECTION("stationary states are consensus solutions (non-redundant, strongly connected)") {
    auto prob = generate_problem(3, 3, {1, 1, 1}, 11, true);
    // run to convergence; the fixed point must solve Ax = b with all agents equal
    const auto trace = run_sync(prob, GraphSchedule::fixed(Digraph::ring(3)),
                                {.max_steps = 30000, .tol = 1e-11, .seed = 3});
    REQUIRE(trace.converged);
    const auto& last = trace.final_step().states;
    const Vector avg = agent_average(last);
    const auto again = sync_step(last, Digraph::ring(3), prob);
    for (int i = 0; i < 3; ++i) {
      REQUIRE((again[i] - last[i]).norm() <= 1e-9);
      REQUIRE((last[i] - avg).norm() <= 1e-9);
    }
    REQUIRE((prob.stacked_A() * avg - prob.stacked_b()).norm() <= 1e-8);
  }
  SECTION("non-unique case: consensus limit solves the system and differs from the "
          "min-norm solution inside the common kernel intersection") {
    auto prob = generate_problem(3, 4, {1, 1, 1}, 12, true);
    REQUIRE_FALSE(prob.x_star.has_value());  // rank 3 < n = 4
    const auto sched = GraphSchedule::seeded_random(3, 31, 3);
    const auto trace = run_sync(prob, sched, {.max_steps = 30000, .tol = 1e-10, .seed = 4});
    REQUIRE(trace.converged);
    const Vector x_f = agent_average(trace.final_step().states);
    REQUIRE((prob.stacked_A() * x_f - prob.stacked_b()).norm() <= 1e-8);
    const Vector x_min = particular_solution(prob.stacked_A(), prob.stacked_b());
    const Subspace inter = subspace_intersection(prob.projectors());
    REQUIRE(inter.dim() == 1);
    REQUIRE(inter.membership_defect(x_f - x_min) <= 1e-8);
    // same membership through the quotient: ker Q is the common intersection
    const auto quotient = quotient_projectors(prob.projectors());
    REQUIRE((quotient.Q * (x_f - x_min)).norm() <= 1e-8);
  }
  SECTION("all-zero constraint blocks degenerate to plain averaging consensus") {
    const Problem p = Problem::from_blocks({{Matrix::Zero(1, 2), Vector{{0.0}}},
                                            {Matrix::Zero(1, 2), Vector{{0.0}}},
                                            {Matrix::Zero(1, 2), Vector{{0.0}}}});
    const auto sched = GraphSchedule::seeded_random(3, 37, 2);
    const auto trace = run_sync(p, sched, {.max_steps = 5000, .tol = 1e-10, .seed = 5});
    REQUIRE(trace.converged);
    // averaging dynamics: one step on a complete graph equals the plain mean
    auto states = init_states(p, 6);
    const Vector mean = agent_average(states);
    const auto stepped = sync_step(states, Digraph::complete(3), p);
    for (int i = 0; i < 3; ++i) REQUIRE((stepped[i] - mean).norm() <= 1e-12);
  }
}
