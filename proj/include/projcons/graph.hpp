#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "projcons/errors.hpp"

namespace projcons {

// Directed graph on m <= 64 vertices, stored as dense bit adjacency.
// An arc (from, to) means information flows from `from` to `to`; the
// in-neighbors of i are therefore the agents whose states i can read.
// Neighbor graphs carry a self-arc at every vertex.
class Digraph {
 public:
  explicit Digraph(int m) : m_(m), out_(static_cast<std::size_t>(m), 0) {
    if (m < 1 || m > 64) throw ContractViolation("Digraph: vertex count must be in [1, 64]");
  }

  static Digraph self_loops(int m) {
    Digraph g(m);
    for (int i = 0; i < m; ++i) g.add_arc(i, i);
    return g;
  }

  static Digraph complete(int m) {
    Digraph g(m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) g.add_arc(i, j);
    return g;
  }

  // Directed cycle 0 -> 1 -> ... -> m-1 -> 0 plus self-arcs.
  static Digraph ring(int m) {
    Digraph g = self_loops(m);
    for (int i = 0; i < m; ++i) g.add_arc(i, (i + 1) % m);
    return g;
  }

  int vertex_count() const { return m_; }

  void add_arc(int from, int to) {
    check_vertex(from);
    check_vertex(to);
    out_[static_cast<std::size_t>(from)] |= bit(to);
  }

  bool has_arc(int from, int to) const {
    check_vertex(from);
    check_vertex(to);
    return (out_[static_cast<std::size_t>(from)] & bit(to)) != 0;
  }

  bool has_all_self_arcs() const {
    for (int i = 0; i < m_; ++i)
      if (!has_arc(i, i)) return false;
    return true;
  }

  std::uint64_t out_mask(int i) const {
    check_vertex(i);
    return out_[static_cast<std::size_t>(i)];
  }

  // Agents j with an arc j -> i, in increasing order.
  std::vector<int> in_neighbors(int i) const {
    check_vertex(i);
    std::vector<int> result;
    for (int j = 0; j < m_; ++j)
      if (has_arc(j, i)) result.push_back(j);
    return result;
  }

  int in_degree(int i) const {
    check_vertex(i);
    int d = 0;
    for (int j = 0; j < m_; ++j)
      if (has_arc(j, i)) ++d;
    return d;
  }

  std::vector<std::pair<int, int>> arcs() const {
    std::vector<std::pair<int, int>> result;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        if (has_arc(i, j)) result.emplace_back(i, j);
    return result;
  }

  // True when every arc of this graph is also an arc of `other`.
  bool is_spanning_subgraph_of(const Digraph& other) const {
    if (m_ != other.m_) return false;
    for (int i = 0; i < m_; ++i)
      if ((out_[static_cast<std::size_t>(i)] & ~other.out_[static_cast<std::size_t>(i)]) != 0)
        return false;
    return true;
  }

  friend bool operator==(const Digraph& a, const Digraph& b) {
    return a.m_ == b.m_ && a.out_ == b.out_;
  }
  friend bool operator!=(const Digraph& a, const Digraph& b) { return !(a == b); }

 private:
  static std::uint64_t bit(int j) { return std::uint64_t{1} << j; }

  void check_vertex(int v) const {
    if (v < 0 || v >= m_) throw ContractViolation("Digraph: vertex index out of range");
  }

  int m_;
  std::vector<std::uint64_t> out_;
};

// Composition gq o gp: arc (i, j) present just in case there is a vertex k
// with (i, k) an arc of gp and (k, j) an arc of gq.  Matches multiplication
// of nonnegative matrices: graph(M2 M1) = graph(M2) o graph(M1).
inline Digraph compose(const Digraph& gq, const Digraph& gp) {
  const int m = gp.vertex_count();
  if (gq.vertex_count() != m) throw ShapeError("compose: vertex-count mismatch");
  Digraph result(m);
  for (int i = 0; i < m; ++i) {
    std::uint64_t mask = 0;
    for (int k = 0; k < m; ++k)
      if (gp.has_arc(i, k)) mask |= gq.out_mask(k);
    for (int j = 0; j < m; ++j)
      if (mask & (std::uint64_t{1} << j)) result.add_arc(i, j);
  }
  return result;
}

namespace detail {

// reach[i] = bitmask of vertices reachable from i, including i itself.
inline std::vector<std::uint64_t> reachability(const Digraph& g) {
  const int m = g.vertex_count();
  std::vector<std::uint64_t> reach(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::uint64_t seen = std::uint64_t{1} << i;
    std::uint64_t frontier = seen;
    while (frontier != 0) {
      std::uint64_t next = 0;
      for (int v = 0; v < m; ++v)
        if (frontier & (std::uint64_t{1} << v)) next |= g.out_mask(v);
      frontier = next & ~seen;
      seen |= next;
    }
    reach[static_cast<std::size_t>(i)] = seen;
  }
  return reach;
}

}  // namespace detail

inline bool is_strongly_connected(const Digraph& g) {
  const int m = g.vertex_count();
  const std::uint64_t all = (m == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << m) - 1);
  const auto reach = detail::reachability(g);
  for (int i = 0; i < m; ++i)
    if (reach[static_cast<std::size_t>(i)] != all) return false;
  return true;
}

// A vertex is essential when it is reachable from every vertex reachable
// from it.  Every directed graph has at least one.
inline std::vector<int> essential_vertices(const Digraph& g) {
  const int m = g.vertex_count();
  const auto reach = detail::reachability(g);
  std::vector<int> result;
  for (int i = 0; i < m; ++i) {
    bool essential = true;
    for (int j = 0; j < m && essential; ++j)
      if (reach[static_cast<std::size_t>(i)] & (std::uint64_t{1} << j))
        essential = (reach[static_cast<std::size_t>(j)] & (std::uint64_t{1} << i)) != 0;
    if (essential) result.push_back(i);
  }
  return result;
}

// Flocking matrix of a neighbor graph: row i carries 1/m_i at every in-neighbor
// of i (self included) and zero elsewhere.  Row-stochastic with positive
// diagonal; its graph is exactly g.
inline Eigen::MatrixXd flocking_matrix(const Digraph& g) {
  const int m = g.vertex_count();
  if (!g.has_all_self_arcs())
    throw ContractViolation("flocking_matrix: neighbor graph must have self-arcs at all vertices");
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double weight = 1.0 / static_cast<double>(g.in_degree(i));
    for (int j = 0; j < m; ++j)
      if (g.has_arc(j, i)) f(i, j) = weight;
  }
  return f;
}

// True when every complete window of l consecutive graphs starting at tau0
// (1-based) composes to a strongly connected graph.  The sequence must be
// long enough to contain at least one complete window.
inline bool is_repeatedly_jointly_strongly_connected(const std::vector<Digraph>& seq, int l,
                                                     int tau0) {
  if (l < 1 || tau0 < 1)
    throw ContractViolation("is_repeatedly_jointly_strongly_connected: l and tau0 must be >= 1");
  const long len = static_cast<long>(seq.size());
  if (len < tau0 + l - 1)
    throw InsufficientLength("is_repeatedly_jointly_strongly_connected: no complete window fits");
  for (long start = tau0; start + l - 1 <= len; start += l) {
    Digraph composed = seq[static_cast<std::size_t>(start - 1)];
    for (long t = start + 1; t <= start + l - 1; ++t)
      composed = compose(seq[static_cast<std::size_t>(t - 1)], composed);
    if (!is_strongly_connected(composed)) return false;
  }
  return true;
}

// Partition of the vertices into mutual-reachability equivalence classes,
// each class sorted, classes ordered by smallest member.
inline std::vector<std::vector<int>> mutually_reachable_classes(const Digraph& g) {
  const int m = g.vertex_count();
  const auto reach = detail::reachability(g);
  std::vector<bool> assigned(static_cast<std::size_t>(m), false);
  std::vector<std::vector<int>> classes;
  for (int i = 0; i < m; ++i) {
    if (assigned[static_cast<std::size_t>(i)]) continue;
    std::vector<int> cls;
    for (int j = i; j < m; ++j) {
      const bool ij = (reach[static_cast<std::size_t>(i)] & (std::uint64_t{1} << j)) != 0;
      const bool ji = (reach[static_cast<std::size_t>(j)] & (std::uint64_t{1} << i)) != 0;
      if (ij && ji) {
        cls.push_back(j);
        assigned[static_cast<std::size_t>(j)] = true;
      }
    }
    classes.push_back(std::move(cls));
  }
  return classes;
}

}  // namespace projcons
