#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "projcons/errors.hpp"
#include "projcons/graph.hpp"
#include "projcons/rng.hpp"

namespace projcons {

// Deterministic generator of the neighbor-graph sequence N(1), N(2), ...
// Every emitted graph has self-arcs at all vertices.  The seeded-random kind
// is a pure function of (seed, t): each window of l consecutive steps gets a
// directed ring planted at a seeded slot, which makes every window compose to
// a strongly connected graph by construction; the remaining slots are seeded
// random supergraphs of the self-loop graph.
class GraphSchedule {
 public:
  static GraphSchedule fixed(Digraph g) {
    if (!g.has_all_self_arcs())
      throw ContractViolation("GraphSchedule: neighbor graphs must have self-arcs");
    GraphSchedule s;
    s.kind_ = Fixed{std::move(g)};
    return s;
  }

  static GraphSchedule periodic(std::vector<Digraph> period) {
    if (period.empty()) throw ContractViolation("GraphSchedule: periodic list must be nonempty");
    const int m = period.front().vertex_count();
    for (const auto& g : period) {
      if (g.vertex_count() != m) throw ShapeError("GraphSchedule: period graphs must share m");
      if (!g.has_all_self_arcs())
        throw ContractViolation("GraphSchedule: neighbor graphs must have self-arcs");
    }
    GraphSchedule s;
    s.kind_ = Periodic{std::move(period)};
    return s;
  }

  static GraphSchedule seeded_random(int m, std::uint64_t seed, int l, double arc_prob = 0.35) {
    if (l < 1) throw ContractViolation("GraphSchedule: window length l must be >= 1");
    if (!(arc_prob >= 0.0 && arc_prob <= 1.0))
      throw ContractViolation("GraphSchedule: arc probability must be in [0, 1]");
    GraphSchedule s;
    s.kind_ = SeededRandom{m, seed, l, arc_prob};
    return s;
  }

  GraphSchedule with_horizon(long horizon) const {
    GraphSchedule s = *this;
    s.horizon_ = horizon;
    return s;
  }

  int vertex_count() const {
    if (const auto* f = std::get_if<Fixed>(&kind_)) return f->graph.vertex_count();
    if (const auto* p = std::get_if<Periodic>(&kind_)) return p->period.front().vertex_count();
    return std::get<SeededRandom>(kind_).m;
  }

  // Neighbor graph at step t >= 1.
  Digraph at(long t) const {
    if (t < 1) throw ContractViolation("GraphSchedule: t must be >= 1");
    if (horizon_ && t > *horizon_)
      throw ContractViolation("GraphSchedule: t is beyond the schedule horizon");
    if (const auto* f = std::get_if<Fixed>(&kind_)) return f->graph;
    if (const auto* p = std::get_if<Periodic>(&kind_))
      return p->period[static_cast<std::size_t>((t - 1) % static_cast<long>(p->period.size()))];

    const auto& sr = std::get<SeededRandom>(kind_);
    const long window = (t - 1) / sr.l;
    const long slot = (t - 1) % sr.l;
    auto window_rng = make_rng(sr.seed, 0x77696E00ull ^ static_cast<std::uint64_t>(window));
    const long planted = static_cast<long>(uniform_int(window_rng, static_cast<std::uint64_t>(sr.l)));
    if (slot == planted) return Digraph::ring(sr.m);

    Digraph g = Digraph::self_loops(sr.m);
    auto rng = make_rng(sr.seed, 0x73746570ull ^ static_cast<std::uint64_t>(t));
    for (int i = 0; i < sr.m; ++i)
      for (int j = 0; j < sr.m; ++j)
        if (i != j && uniform01(rng) < sr.arc_prob) g.add_arc(i, j);
    return g;
  }

 private:
  struct Fixed {
    Digraph graph;
  };
  struct Periodic {
    std::vector<Digraph> period;
  };
  struct SeededRandom {
    int m;
    std::uint64_t seed;
    int l;
    double arc_prob;
  };

  GraphSchedule() : kind_(Fixed{Digraph::self_loops(1)}) {}

  std::variant<Fixed, Periodic, SeededRandom> kind_;
  std::optional<long> horizon_;
};

inline Digraph schedule_next(const GraphSchedule& sched, long t) { return sched.at(t); }

}  // namespace projcons
