#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckdist/errors.hpp"
#include "ckdist/lmc.hpp"

namespace ckdist {

/// Enumeration guard: |S_1| + |S_2| may not exceed this.
inline constexpr std::size_t kMaxBisimStates = 20;

/// A candidate relation between the state spaces of two chains, by index.
struct BisimRelation {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Relation file format: { "pairs": [["v","v"], ["c","c"]] } with state names
/// from the two chain files, first chain's name first.
inline BisimRelation relation_from_json(const json& j, const LabeledMarkovChain& chain1,
                                        const LabeledMarkovChain& chain2) {
  BisimRelation rel;
  try {
    if (!j.is_object() || !j.contains("pairs"))
      throw Error(Errc::ParseError, "relation document needs a 'pairs' array");
    for (const auto& pr : j.at("pairs")) {
      if (!pr.is_array() || pr.size() != 2)
        throw Error(Errc::ParseError, "each pair must be a two-element array");
      rel.pairs.emplace_back(chain1.state_index(pr[0].get<std::string>()),
                             chain2.state_index(pr[1].get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  std::sort(rel.pairs.begin(), rel.pairs.end());
  rel.pairs.erase(std::unique(rel.pairs.begin(), rel.pairs.end()), rel.pairs.end());
  return rel;
}

inline BisimRelation load_relation(const std::filesystem::path& path,
                                   const LabeledMarkovChain& chain1,
                                   const LabeledMarkovChain& chain2) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
  return relation_from_json(j, chain1, chain2);
}

/// A product set (as bitmasks over the two state spaces) that the relation
/// maps into itself in both directions.
struct ClosedSetPair {
  std::uint32_t set1 = 0;
  std::uint32_t set2 = 0;
};

namespace detail {

struct BisimContext {
  std::size_t n1, n2;
  std::vector<std::uint32_t> image1;  // per state of chain 1: related states in chain 2
  std::vector<std::uint32_t> image2;
  std::vector<std::uint32_t> closure1;  // per subset of S_1: union of images
  std::vector<std::uint32_t> closure2;
};

inline BisimContext make_context(const BisimRelation& relation,
                                 const LabeledMarkovChain& chain1,
                                 const LabeledMarkovChain& chain2) {
  BisimContext ctx;
  ctx.n1 = chain1.num_states();
  ctx.n2 = chain2.num_states();
  if (ctx.n1 + ctx.n2 > kMaxBisimStates)
    throw Error(Errc::TooManyStates,
                std::to_string(ctx.n1) + "+" + std::to_string(ctx.n2) +
                    " states exceed the enumeration guard of " +
                    std::to_string(kMaxBisimStates));
  ctx.image1.assign(ctx.n1, 0);
  ctx.image2.assign(ctx.n2, 0);
  for (const auto& [s1, s2] : relation.pairs) {
    if (s1 >= ctx.n1 || s2 >= ctx.n2)
      throw Error(Errc::OutOfRange, "relation pair references a missing state");
    ctx.image1[s1] |= 1u << s2;
    ctx.image2[s2] |= 1u << s1;
  }
  ctx.closure1.assign(std::size_t{1} << ctx.n1, 0);
  for (std::uint32_t mask = 1; mask < ctx.closure1.size(); ++mask) {
    const std::uint32_t low = mask & (~mask + 1);
    const int bit = std::countr_zero(low);
    ctx.closure1[mask] = ctx.closure1[mask ^ low] | ctx.image1[bit];
  }
  ctx.closure2.assign(std::size_t{1} << ctx.n2, 0);
  for (std::uint32_t mask = 1; mask < ctx.closure2.size(); ++mask) {
    const std::uint32_t low = mask & (~mask + 1);
    const int bit = std::countr_zero(low);
    ctx.closure2[mask] = ctx.closure2[mask ^ low] | ctx.image2[bit];
  }
  return ctx;
}

inline bool closed(const BisimContext& ctx, std::uint32_t set1, std::uint32_t set2) {
  return (ctx.closure1[set1] & ~set2) == 0 && (ctx.closure2[set2] & ~set1) == 0;
}

/// Subset sums of `values` over all bitmasks.
inline std::vector<double> subset_sums(const std::vector<double>& values) {
  std::vector<double> sums(std::size_t{1} << values.size(), 0.0);
  for (std::uint32_t mask = 1; mask < sums.size(); ++mask) {
    const std::uint32_t low = mask & (~mask + 1);
    const int bit = std::countr_zero(low);
    sums[mask] = sums[mask ^ low] + values[bit];
  }
  return sums;
}

}  // namespace detail

/**
 * All R-closed product sets, in ascending (set1, set2) bitmask order.
 * Exhaustive over 2^{n1+n2} candidates; guarded at 20 total states.
 */
inline std::vector<ClosedSetPair> enumerate_closed_sets(const BisimRelation& relation,
                                                        const LabeledMarkovChain& chain1,
                                                        const LabeledMarkovChain& chain2) {
  const auto ctx = detail::make_context(relation, chain1, chain2);
  std::vector<ClosedSetPair> out;
  for (std::uint32_t set1 = 0; set1 < (1u << ctx.n1); ++set1)
    for (std::uint32_t set2 = 0; set2 < (1u << ctx.n2); ++set2)
      if (detail::closed(ctx, set1, set2)) out.push_back({set1, set2});
  return out;
}

struct BisimWitness {
  int condition = 0;  // 1 = label clash, 2 = initial mass, 3 = transition mass
  std::size_t s1 = 0, s2 = 0;
  std::uint32_t set1 = 0, set2 = 0;
  double gap = 0.0;
};

struct BisimVerdict {
  bool accepted = true;
  std::optional<BisimWitness> witness;
};

/**
 * Checks the three conditions of an epsilon-approximate probabilistic
 * bisimulation relation by exhaustive enumeration of R-closed sets:
 * label agreement on every related pair, initial masses within epsilon on
 * every closed set, transition masses within epsilon for every related pair
 * and closed set. On rejection the first violator in scan order (closed sets
 * ascending, relation pairs in sorted order) is reported.
 */
inline BisimVerdict check_bisim(const BisimRelation& relation, double epsilon,
                                const LabeledMarkovChain& chain1,
                                const LabeledMarkovChain& chain2) {
  require_same_alphabet(chain1, chain2);
  const auto ctx = detail::make_context(relation, chain1, chain2);

  for (const auto& [s1, s2] : relation.pairs)
    if (chain1.label_of(s1) != chain2.label_of(s2))
      return {false, BisimWitness{1, s1, s2, 0, 0, 0.0}};

  const auto mu1 = detail::subset_sums(chain1.initial());
  const auto mu2 = detail::subset_sums(chain2.initial());
  std::vector<std::vector<double>> rows1, rows2;
  for (std::size_t s = 0; s < ctx.n1; ++s)
    rows1.push_back(detail::subset_sums(chain1.transitions()[s]));
  for (std::size_t s = 0; s < ctx.n2; ++s)
    rows2.push_back(detail::subset_sums(chain2.transitions()[s]));

  for (std::uint32_t set1 = 0; set1 < (1u << ctx.n1); ++set1) {
    for (std::uint32_t set2 = 0; set2 < (1u << ctx.n2); ++set2) {
      if (!detail::closed(ctx, set1, set2)) continue;
      const double initial_gap = std::abs(mu1[set1] - mu2[set2]);
      if (initial_gap > epsilon)
        return {false, BisimWitness{2, 0, 0, set1, set2, initial_gap}};
      for (const auto& [s1, s2] : relation.pairs) {
        const double gap = std::abs(rows1[s1][set1] - rows2[s2][set2]);
        if (gap > epsilon)
          return {false, BisimWitness{3, s1, s2, set1, set2, gap}};
      }
    }
  }
  return {true, std::nullopt};
}

struct MinimalEpsilon {
  double value = 0.0;
  /// True when every gap is exactly zero: the relation is a classical
  /// (exact) probabilistic bisimulation, outside the open interval (0, 1)
  /// the approximate definition quantifies over.
  bool exact = false;
};

/**
 * The largest initial- or transition-mass gap over all R-closed sets; the
 * relation qualifies as an epsilon-approximate bisimulation for any epsilon
 * at or above this value. Label disagreement on a related pair is an error
 * (no epsilon can repair condition 1).
 */
inline MinimalEpsilon minimal_epsilon(const BisimRelation& relation,
                                      const LabeledMarkovChain& chain1,
                                      const LabeledMarkovChain& chain2) {
  require_same_alphabet(chain1, chain2);
  const auto ctx = detail::make_context(relation, chain1, chain2);

  for (const auto& [s1, s2] : relation.pairs)
    if (chain1.label_of(s1) != chain2.label_of(s2))
      throw Error(Errc::LabelMismatch,
                  "related states '" + chain1.states()[s1] + "' and '" +
                      chain2.states()[s2] + "' carry different labels");

  const auto mu1 = detail::subset_sums(chain1.initial());
  const auto mu2 = detail::subset_sums(chain2.initial());
  std::vector<std::vector<double>> rows1, rows2;
  for (std::size_t s = 0; s < ctx.n1; ++s)
    rows1.push_back(detail::subset_sums(chain1.transitions()[s]));
  for (std::size_t s = 0; s < ctx.n2; ++s)
    rows2.push_back(detail::subset_sums(chain2.transitions()[s]));

  double worst = 0.0;
  for (std::uint32_t set1 = 0; set1 < (1u << ctx.n1); ++set1) {
    for (std::uint32_t set2 = 0; set2 < (1u << ctx.n2); ++set2) {
      if (!detail::closed(ctx, set1, set2)) continue;
      worst = std::max(worst, std::abs(mu1[set1] - mu2[set2]));
      for (const auto& [s1, s2] : relation.pairs)
        worst = std::max(worst, std::abs(rows1[s1][set1] - rows2[s2][set2]));
    }
  }
  return {worst, worst == 0.0};
}

}  // namespace ckdist
