#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ckdist/distances.hpp"
#include "ckdist/errors.hpp"

namespace ckdist {

/// Largest word space the exhaustive transport oracle accepts.
inline constexpr std::size_t kMaxOracleSupport = 64;

/// Denominator cap for reconstructing rationals from float inputs.
inline constexpr std::int64_t kRationalDenominatorCap = 1'000'000'000'000LL;

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

/**
 * Best rational approximation of a nonnegative double with denominator at
 * most `max_den`, via continued-fraction convergents with a semiconvergent
 * tail. Inputs that are exactly small rationals (grids i/N) are recovered
 * exactly.
 */
inline Rational approximate_rational(double x,
                                     std::int64_t max_den = kRationalDenominatorCap) {
  if (!(x >= 0.0) || !std::isfinite(x))
    throw Error(Errc::OutOfRange, "cannot rationalize a negative or non-finite value");
  std::int64_t hm2 = 0, km2 = 1;
  std::int64_t hm1 = 1, km1 = 0;
  long double v = static_cast<long double>(x);
  for (int iter = 0; iter < 64; ++iter) {
    const long double a_ld = std::floor(v);
    if (a_ld > 4e18L) break;
    const std::int64_t a = static_cast<std::int64_t>(a_ld);
    if (km1 > 0 && (a > (max_den - km2) / km1)) {
      // Full convergent busts the cap; take the best feasible semiconvergent.
      const std::int64_t t = (max_den - km2) / km1;
      const std::int64_t hs = t * hm1 + hm2;
      const std::int64_t ks = t * km1 + km2;
      if (ks > 0) {
        const long double err_semi =
            std::abs(static_cast<long double>(x) - static_cast<long double>(hs) / ks);
        const long double err_conv =
            std::abs(static_cast<long double>(x) - static_cast<long double>(hm1) / km1);
        if (err_semi < err_conv) return {hs, ks};
      }
      return {hm1, km1};
    }
    const std::int64_t h = a * hm1 + hm2;
    const std::int64_t k = a * km1 + km2;
    hm2 = hm1; km2 = km1;
    hm1 = h; km1 = k;
    const long double frac = v - a_ld;
    if (frac <= 0.0L) break;
    v = 1.0L / frac;
  }
  if (km1 == 0) return {static_cast<std::int64_t>(std::llround(x)), 1};
  return {hm1, km1};
}

/// Joint distribution whose row marginals are p and column marginals q.
struct Coupling {
  std::vector<std::vector<double>> joint;
};

inline bool is_coupling(const Coupling& c, std::span<const double> p,
                        std::span<const double> q, double tol = 1e-9) {
  if (c.joint.size() != p.size()) return false;
  std::vector<double> col_sums(q.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (c.joint[i].size() != q.size()) return false;
    double row_sum = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (c.joint[i][j] < 0.0) return false;
      row_sum += c.joint[i][j];
      col_sums[j] += c.joint[i][j];
    }
    if (std::abs(row_sum - p[i]) > tol) return false;
  }
  for (std::size_t j = 0; j < q.size(); ++j)
    if (std::abs(col_sums[j] - q[j]) > tol) return false;
  return true;
}

namespace detail {

/// Successive-shortest-path min-cost flow on integer capacities and costs.
/// Small scale only; arithmetic stays in integers throughout.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : head_(nodes, -1) {}

  int add_edge(int from, int to, std::int64_t cap, std::int64_t cost) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({to, head_[from], cap, cost});
    head_[from] = id;
    edges_.push_back({from, head_[to], 0, -cost});
    head_[to] = id + 1;
    return id;
  }

  /// Flow pushed over the forward edge created as `id`.
  std::int64_t flow_on(int id) const { return edges_[id + 1].cap; }

  /// Total cost fits int64: every flow unit crosses exactly one bipartite
  /// edge, so it is bounded by denominator * m^{k-1} <= 4e15 * 32.
  std::int64_t run(int source, int sink) {
    const int n = static_cast<int>(head_.size());
    std::int64_t total_cost = 0;
    const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> dist(n);
    std::vector<int> parent_edge(n);
    std::vector<char> in_queue(n);
    for (;;) {
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(parent_edge.begin(), parent_edge.end(), -1);
      std::fill(in_queue.begin(), in_queue.end(), 0);
      dist[source] = 0;
      std::deque<int> queue{source};
      in_queue[source] = 1;
      while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        in_queue[u] = 0;
        for (int e = head_[u]; e != -1; e = edges_[e].next) {
          if (edges_[e].cap <= 0) continue;
          const int v = edges_[e].to;
          if (dist[u] + edges_[e].cost < dist[v]) {
            dist[v] = dist[u] + edges_[e].cost;
            parent_edge[v] = e;
            if (!in_queue[v]) {
              queue.push_back(v);
              in_queue[v] = 1;
            }
          }
        }
      }
      if (parent_edge[sink] == -1) break;
      std::int64_t push = inf;
      for (int v = sink; v != source;) {
        const auto& e = edges_[parent_edge[v]];
        push = std::min(push, e.cap);
        v = edges_[parent_edge[v] ^ 1].to;
      }
      for (int v = sink; v != source;) {
        const int e = parent_edge[v];
        edges_[e].cap -= push;
        edges_[e ^ 1].cap += push;
        total_cost += push * edges_[e].cost;
        v = edges_[e ^ 1].to;
      }
    }
    return total_cost;
  }

 private:
  struct Edge {
    int to;
    int next;
    std::int64_t cap;
    std::int64_t cost;
  };
  std::vector<int> head_;
  std::vector<Edge> edges_;
};

struct ScaledMasses {
  std::vector<std::int64_t> units;
  std::int64_t denominator = 1;
};

/// Puts all masses of both distributions on one exact common denominator.
/// Falls back to a fixed 1e12 grid when the lcm of the reconstructed
/// denominators would overflow.
inline ScaledMasses scale_to_common_denominator(std::span<const double> p,
                                                std::span<const double> q) {
  constexpr std::int64_t kLcmCap = 4'000'000'000'000'000LL;
  std::vector<Rational> rationals;
  rationals.reserve(p.size() + q.size());
  for (double v : p) rationals.push_back(approximate_rational(v));
  for (double v : q) rationals.push_back(approximate_rational(v));

  std::int64_t lcm = 1;
  bool overflow = false;
  for (const auto& r : rationals) {
    const std::int64_t g = std::gcd(lcm, r.den);
    if (lcm / g > kLcmCap / r.den) { overflow = true; break; }
    lcm = lcm / g * r.den;
  }

  ScaledMasses out;
  if (!overflow) {
    out.denominator = lcm;
    for (const auto& r : rationals) out.units.push_back(r.num * (lcm / r.den));
  } else {
    out.denominator = kRationalDenominatorCap;
    for (const auto& r : rationals) {
      const long double v = static_cast<long double>(r.num) / r.den;
      out.units.push_back(static_cast<std::int64_t>(
          std::llround(v * static_cast<long double>(out.denominator))));
    }
  }
  return out;
}

}  // namespace detail

struct TransportResult {
  double cost = 0.0;
  Coupling plan;
};

/**
 * Exact optimal-transport oracle for the Kantorovich distance under the
 * Cantor metric: reconstructs rationals from the float masses, solves the
 * transportation problem with an integer successive-shortest-path solver and
 * only converts back to double at the very end. Deliberately independent of
 * the closed-form route it is used to check.
 *
 * Accepts word spaces with at most 64 words (m^k <= 64).
 */
inline TransportResult kantorovich_oracle_plan(const WordDistribution& p,
                                               const WordDistribution& q) {
  if (p.alphabet_size != q.alphabet_size)
    throw Error(Errc::AlphabetMismatch, "distributions over different alphabets");
  if (p.word_length != q.word_length)
    throw Error(Errc::LengthMismatch, "distributions over words of different length");
  const std::size_t m = p.alphabet_size;
  const std::size_t k = p.word_length;
  if (m < 2) throw Error(Errc::AlphabetTooSmall, "alphabet size must be at least 2");
  if (k < 1) throw Error(Errc::OutOfRange, "word length must be at least 1");
  const std::size_t n = word_count(m, k);
  if (n > kMaxOracleSupport)
    throw Error(Errc::TooLarge, "oracle support " + std::to_string(n) +
                                    " exceeds " + std::to_string(kMaxOracleSupport));
  if (p.mass.size() != n || q.mass.size() != n)
    throw Error(Errc::OutOfRange, "mass vector size does not match m^k");
  double p_total = 0.0, q_total = 0.0;
  for (double v : p.mass) {
    if (v < 0.0) throw Error(Errc::OutOfRange, "negative mass");
    p_total += v;
  }
  for (double v : q.mass) {
    if (v < 0.0) throw Error(Errc::OutOfRange, "negative mass");
    q_total += v;
  }
  if (std::abs(p_total - q_total) > 1e-9)
    throw Error(Errc::OutOfRange, "total masses differ beyond tolerance");

  auto scaled = detail::scale_to_common_denominator(p.mass, q.mass);
  std::span<std::int64_t> supply(scaled.units.data(), n);
  std::span<std::int64_t> demand(scaled.units.data() + n, n);

  // Rounding can leave the two sides off by a few units; rebalance on the
  // largest demand entry so the transportation problem is exactly feasible.
  const std::int64_t supply_total = std::accumulate(supply.begin(), supply.end(),
                                                    std::int64_t{0});
  const std::int64_t demand_total = std::accumulate(demand.begin(), demand.end(),
                                                    std::int64_t{0});
  if (supply_total != demand_total) {
    auto largest = std::max_element(demand.begin(), demand.end());
    *largest += supply_total - demand_total;
    if (*largest < 0)
      throw Error(Errc::OutOfRange, "total masses differ beyond tolerance");
  }

  // Cantor costs scaled by m^{k-1}: words first differing at position d cost
  // m^{k-d} units; equal words cost 0.
  std::vector<Word> words;
  words.reserve(n);
  for (std::size_t i = 0; i < n; ++i) words.push_back(word_from_index(i, k, m));
  std::vector<std::int64_t> cost_scale(k + 1);
  cost_scale[0] = 1;
  for (std::size_t i = 1; i <= k; ++i)
    cost_scale[i] = cost_scale[i - 1] * static_cast<std::int64_t>(m);

  const int source = static_cast<int>(2 * n);
  const int sink = source + 1;
  detail::MinCostFlow flow(static_cast<int>(2 * n + 2));
  std::vector<std::vector<int>> edge_ids(n, std::vector<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    flow.add_edge(source, static_cast<int>(i), supply[i], 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t d = 0;
      while (d < k && words[i][d] == words[j][d]) ++d;
      const std::int64_t cost = (d == k) ? 0 : cost_scale[k - 1 - d];
      edge_ids[i][j] = flow.add_edge(static_cast<int>(i), static_cast<int>(n + j),
                                     supply_total, cost);
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    flow.add_edge(static_cast<int>(n + j), sink, demand[j], 0);

  const std::int64_t cost_units = flow.run(source, sink);

  TransportResult result;
  const long double scale = static_cast<long double>(scaled.denominator) *
                            static_cast<long double>(cost_scale[k - 1]);
  result.cost = static_cast<double>(static_cast<long double>(cost_units) / scale);
  result.plan.joint.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      result.plan.joint[i][j] =
          static_cast<double>(static_cast<long double>(flow.flow_on(edge_ids[i][j])) /
                              static_cast<long double>(scaled.denominator));
  return result;
}

inline double kantorovich_oracle(const WordDistribution& p, const WordDistribution& q) {
  return kantorovich_oracle_plan(p, q).cost;
}

}  // namespace ckdist
