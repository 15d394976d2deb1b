#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "projcons/block_matrix.hpp"
#include "projcons/graph.hpp"
#include "projcons/linalg.hpp"
#include "projcons/rng.hpp"

namespace projcons {

// Worst-case geometric rate certificate for strongly-connected-each-step
// schedules and unique solutions.  rho is the maximum spectral norm over
// covering projector products of length q + 1, q = (m-1)^2, and
// lambda = (1 - (m-1)(1-rho)/m^q)^(1/q).
struct RateCertificate {
  int m = 0;
  int n = 0;
  int q = 0;
  double rho = 0.0;
  double lambda = 0.0;
  bool exhaustive = false;  // sampled mode gives a lower estimate, not a certificate
  long samples = 0;

  std::string method() const { return exhaustive ? "exhaustive" : "sampled"; }
};

inline double lambda_bound(const RateCertificate& cert) {
  if (!(cert.rho >= 0.0 && cert.rho < 1.0))
    throw ContractViolation("lambda_bound: rho must lie in [0, 1)");
  if (cert.m < 2) throw ContractViolation("lambda_bound: needs at least two agents");
  const double mq = std::pow(static_cast<double>(cert.m), cert.q);
  return std::pow(1.0 - static_cast<double>(cert.m - 1) * (1.0 - cert.rho) / mq,
                  1.0 / static_cast<double>(cert.q));
}

struct RhoExhaustive {};
struct RhoSampled {
  std::uint64_t seed = 0;
  long count = 1000;
};
using RhoMode = std::variant<RhoExhaustive, RhoSampled>;

namespace detail {

// DFS over index sequences of length q+1, reusing the partial product along
// the path and pruning branches that can no longer cover every index.
inline void rho_search(const std::vector<Matrix>& projectors, const Matrix& partial,
                       std::uint32_t covered, int depth, int total_len, double& best) {
  const int m = static_cast<int>(projectors.size());
  const std::uint32_t all = (std::uint32_t{1} << m) - 1;
  if (depth == total_len) {
    if (covered == all) best = std::max(best, spectral_norm(partial));
    return;
  }
  int missing = 0;
  for (int i = 0; i < m; ++i)
    if (!(covered & (std::uint32_t{1} << i))) ++missing;
  if (missing > total_len - depth) return;
  for (int i = 0; i < m; ++i)
    rho_search(projectors, partial * projectors[static_cast<std::size_t>(i)],
               covered | (std::uint32_t{1} << i), depth + 1, total_len, best);
}

}  // namespace detail

// rho over covering products of length (m-1)^2 + 1.  Exhaustive mode
// enumerates the full set (gated to m^(q+1) <= 2,000,000, i.e. m <= 4);
// sampled mode evaluates seeded random covering sequences and is only a
// lower estimate of rho.
inline RateCertificate rho_bound(const std::vector<Matrix>& projectors, const RhoMode& mode) {
  detail::check_projector_family(projectors);
  if (subspace_intersection(projectors).dim() != 0)
    throw ContractViolation("rho_bound: projector images must intersect trivially");
  RateCertificate cert;
  cert.m = static_cast<int>(projectors.size());
  cert.n = static_cast<int>(projectors.front().rows());
  cert.q = (cert.m - 1) * (cert.m - 1);
  const int len = cert.q + 1;

  if (std::holds_alternative<RhoExhaustive>(mode)) {
    double budget = 1.0;
    for (int i = 0; i < len; ++i) budget *= cert.m;
    if (budget > 2'000'000.0)
      throw BudgetExceeded("rho_bound: exhaustive enumeration gated to m^(q+1) <= 2e6");
    double best = 0.0;
    detail::rho_search(projectors, Matrix::Identity(cert.n, cert.n), 0, 0, len, best);
    cert.rho = best;
    cert.exhaustive = true;
  } else {
    const auto& sampled = std::get<RhoSampled>(mode);
    auto rng = make_rng(sampled.seed, kStreamRate);
    double best = 0.0;
    for (long s = 0; s < sampled.count; ++s) {
      // Random covering sequence: a random permutation scattered over
      // len slots, remaining slots filled uniformly.
      std::vector<int> seq(static_cast<std::size_t>(len));
      for (auto& v : seq) v = static_cast<int>(uniform_int(rng, static_cast<std::uint64_t>(cert.m)));
      std::vector<int> perm(static_cast<std::size_t>(cert.m));
      for (int i = 0; i < cert.m; ++i) perm[static_cast<std::size_t>(i)] = i;
      for (int i = cert.m - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[uniform_int(rng, static_cast<std::uint64_t>(i + 1))]);
      std::vector<int> slots(static_cast<std::size_t>(len));
      for (int i = 0; i < len; ++i) slots[static_cast<std::size_t>(i)] = i;
      for (int i = len - 1; i > 0; --i)
        std::swap(slots[static_cast<std::size_t>(i)],
                  slots[uniform_int(rng, static_cast<std::uint64_t>(i + 1))]);
      for (int i = 0; i < cert.m; ++i)
        seq[static_cast<std::size_t>(slots[static_cast<std::size_t>(i)])] =
            perm[static_cast<std::size_t>(i)];
      Matrix prod = Matrix::Identity(cert.n, cert.n);
      for (int idx : seq) prod = prod * projectors[static_cast<std::size_t>(idx)];
      best = std::max(best, spectral_norm(prod));
    }
    cert.rho = best;
    cert.exhaustive = false;
    cert.samples = sampled.count;
  }
  cert.lambda = lambda_bound(cert);
  return cert;
}

// Ordered product S_q ... S_1 of row-stochastic matrices; for sandwich
// products this equals the nominal bound of the product.
inline Matrix nominal_bound(const std::vector<Matrix>& s_seq) {
  if (s_seq.empty()) throw ContractViolation("nominal_bound: sequence must be nonempty");
  for (const auto& s : s_seq) check_row_stochastic(s);
  Matrix prod = s_seq.front();
  for (std::size_t k = 1; k < s_seq.size(); ++k) prod = s_seq[k] * prod;
  return prod;
}

// True when some route j = i_0, i_1, ..., i_q = i over the graph sequence
// (arc (i_{k-1}, i_k) in graph k) visits every vertex.  Dynamic program over
// (current vertex, visited subset); gated to m <= 20.
inline bool block_complete(const std::vector<Digraph>& graph_seq, int i, int j) {
  if (graph_seq.empty()) throw ContractViolation("block_complete: sequence must be nonempty");
  const int m = graph_seq.front().vertex_count();
  if (m > 20) throw BudgetExceeded("block_complete: subset DP gated to m <= 20");
  for (const auto& g : graph_seq)
    if (g.vertex_count() != m) throw ShapeError("block_complete: graphs must share m");
  if (i < 0 || i >= m || j < 0 || j >= m)
    throw ContractViolation("block_complete: vertex out of range");

  const std::uint32_t full = (std::uint32_t{1} << m) - 1;
  // reachable[v] = set of visited-subset masks achievable at vertex v
  std::vector<std::vector<bool>> reachable(
      static_cast<std::size_t>(m), std::vector<bool>(std::size_t{1} << m, false));
  reachable[static_cast<std::size_t>(j)][std::uint32_t{1} << j] = true;
  for (const auto& g : graph_seq) {
    std::vector<std::vector<bool>> next(static_cast<std::size_t>(m),
                                        std::vector<bool>(std::size_t{1} << m, false));
    for (int u = 0; u < m; ++u)
      for (std::uint32_t mask = 1; mask <= full; ++mask) {
        if (!reachable[static_cast<std::size_t>(u)][mask]) continue;
        for (int w = 0; w < m; ++w)
          if (g.has_arc(u, w)) next[static_cast<std::size_t>(w)][mask | (std::uint32_t{1} << w)] = true;
      }
    reachable = std::move(next);
  }
  return reachable[static_cast<std::size_t>(i)][full];
}

// sandwich(P, S_q) * ... * sandwich(P, S_1), accumulated left-associatively
// in sequence order; the empty product is the bare block-diagonal P.
inline BlockMatrix transition_product(const std::vector<Matrix>& projectors,
                                      const std::vector<Matrix>& s_seq) {
  BlockMatrix prod = block_diagonal(projectors);
  for (const auto& s : s_seq) prod = sandwich(projectors, s) * prod;
  return prod;
}

namespace detail {

inline void check_repeatedly_l_connected(const std::vector<Digraph>& graph_seq, int l) {
  if (l < 1) throw ContractViolation("window length l must be >= 1");
  if (static_cast<long>(graph_seq.size()) < l)
    throw ContractViolation("graph sequence shorter than one window");
  if (!is_repeatedly_jointly_strongly_connected(graph_seq, l, 1))
    throw ContractViolation("graph sequence is not repeatedly l-connected");
}

inline std::vector<Matrix> flocking_sequence(const std::vector<Digraph>& graph_seq) {
  std::vector<Matrix> fs;
  fs.reserve(graph_seq.size());
  for (const auto& g : graph_seq) fs.push_back(flocking_matrix(g));
  return fs;
}

}  // namespace detail

struct ContractionResult {
  double mixed_norm = 0.0;
  bool is_contraction = false;
};

// Mixed norm of the transition product over the flocking matrices of a
// repeatedly l-connected sequence of length >= (m-1)^2 l; such products are
// contractions when the projector images intersect trivially.
inline ContractionResult contraction_check(const std::vector<Matrix>& projectors,
                                           const std::vector<Digraph>& graph_seq, int l) {
  detail::check_projector_family(projectors);
  if (subspace_intersection(projectors).dim() != 0)
    throw ContractViolation("contraction_check: projector images must intersect trivially");
  const int m = static_cast<int>(projectors.size());
  detail::check_repeatedly_l_connected(graph_seq, l);
  if (static_cast<long>(graph_seq.size()) < static_cast<long>(m - 1) * (m - 1) * l)
    throw ContractViolation("contraction_check: sequence shorter than (m-1)^2 * l");
  ContractionResult result;
  result.mixed_norm = mixed_norm(transition_product(projectors, detail::flocking_sequence(graph_seq)));
  result.is_contraction = result.mixed_norm < 1.0 - 1e-12;
  return result;
}

// Mixed norm of every prefix product (prefix length 0 is the bare P); the
// caller checks the geometric envelope.
inline std::vector<std::pair<long, double>> prefix_mixed_norms(const std::vector<Matrix>& projectors,
                                                           const std::vector<Digraph>& graph_seq,
                                                           int l) {
  detail::check_projector_family(projectors);
  if (subspace_intersection(projectors).dim() != 0)
    throw ContractViolation("prefix_mixed_norms: projector images must intersect trivially");
  detail::check_repeatedly_l_connected(graph_seq, l);
  std::vector<std::pair<long, double>> norms;
  BlockMatrix prod = block_diagonal(projectors);
  norms.emplace_back(0, mixed_norm(prod));
  long t = 0;
  for (const auto& g : graph_seq) {
    prod = sandwich(projectors, flocking_matrix(g)) * prod;
    norms.emplace_back(++t, mixed_norm(prod));
  }
  return norms;
}

}  // namespace projcons
