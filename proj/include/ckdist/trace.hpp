#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ckdist/errors.hpp"
#include "ckdist/lmc.hpp"

namespace ckdist {

using Label = std::uint32_t;
using Word = std::vector<Label>;

/// Hard cap on live words per level. Exceeding it is an error, never a
/// silent truncation; the tree grows as O(m^k) in the worst case.
inline constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 22;

struct TraceOptions {
  std::size_t node_budget = kDefaultNodeBudget;
  /// Words whose mass is <= this in BOTH chains are dropped. The default 0
  /// drops only exact-zero words; any positive value voids the certified
  /// error bound of reports built from the level.
  double prune_threshold = 0.0;
};

/// One surviving word of length `horizon` with its per-chain state masses.
/// total{1,2} are the word probabilities p_1^i(w) and p_2^i(w).
struct PrefixEntry {
  Word word;
  std::vector<double> mass1;
  std::vector<double> mass2;
  double total1 = 0.0;
  double total2 = 0.0;
};

/**
 * One level of the joint prefix tree of two chains: all words of length
 * `horizon` that carry positive mass in at least one chain, in lexicographic
 * order. min_mass_sum is M_i = sum_w min(p_1^i(w), p_2^i(w)) and
 * tv = 1 - M_i.
 *
 * Entries are generated and summed in a fixed deterministic order, so equal
 * inputs produce bitwise equal levels.
 */
struct PrefixLevel {
  int horizon = 0;
  std::vector<PrefixEntry> entries;
  double min_mass_sum = 0.0;
  double tv = 0.0;
  /// True once a word with positive mass was pruned (threshold pruning).
  bool lossy = false;
};

namespace detail {

inline void finalize_level(PrefixLevel& level) {
  double m_sum = 0.0;
  for (const auto& e : level.entries) m_sum += std::min(e.total1, e.total2);
  // Accumulated totals drift from 1 by a few ulps; M_i is clamped into [0, 1]
  // so TV_i can never go negative.
  level.min_mass_sum = std::min(m_sum, 1.0);
  level.tv = 1.0 - level.min_mass_sum;
}

}  // namespace detail

/// Level 1 of the joint tree: one entry per label, with mass concentrated on
/// the states carrying that label, weighted by the initial distributions.
inline PrefixLevel initial_level(const LabeledMarkovChain& chain1,
                                 const LabeledMarkovChain& chain2) {
  require_same_alphabet(chain1, chain2);
  const std::size_t m = chain1.alphabet_size();
  const std::size_t n1 = chain1.num_states();
  const std::size_t n2 = chain2.num_states();

  PrefixLevel level;
  level.horizon = 1;
  for (std::size_t a = 0; a < m; ++a) {
    PrefixEntry e;
    e.word = {static_cast<Label>(a)};
    e.mass1.assign(n1, 0.0);
    e.mass2.assign(n2, 0.0);
    for (std::size_t s : chain1.states_with_label(a)) {
      e.mass1[s] = chain1.initial()[s];
      e.total1 += e.mass1[s];
    }
    for (std::size_t s : chain2.states_with_label(a)) {
      e.mass2[s] = chain2.initial()[s];
      e.total2 += e.mass2[s];
    }
    if (e.total1 == 0.0 && e.total2 == 0.0) continue;
    level.entries.push_back(std::move(e));
  }
  detail::finalize_level(level);
  return level;
}

/**
 * Extends every surviving word by one label: the child mass of `wa` in chain
 * j is the mass of `w` pushed through P_j and restricted to states labeled
 * `a`. Children with zero (or sub-threshold) mass in both chains are pruned.
 * Children are emitted in label order from parents in order, which keeps the
 * level lexicographically sorted.
 */
inline PrefixLevel extend(const PrefixLevel& level, const LabeledMarkovChain& chain1,
                          const LabeledMarkovChain& chain2,
                          const TraceOptions& options = {}) {
  const std::size_t m = chain1.alphabet_size();
  const std::size_t n1 = chain1.num_states();
  const std::size_t n2 = chain2.num_states();
  if (level.horizon < 1)
    throw Error(Errc::OutOfRange, "cannot extend an empty level; build level 1 first");
  if (!level.entries.empty() && (level.entries.front().mass1.size() != n1 ||
                                 level.entries.front().mass2.size() != n2))
    throw Error(Errc::OutOfRange, "level was built from different chains");

  const std::size_t requested = level.entries.size() * m;
  if (requested > options.node_budget)
    throw Error(Errc::NodeBudgetExceeded,
                "level " + std::to_string(level.horizon + 1) + " would create " +
                    std::to_string(requested) + " words; budget is " +
                    std::to_string(options.node_budget));

  PrefixLevel next;
  next.horizon = level.horizon + 1;
  next.lossy = level.lossy;
  next.entries.reserve(level.entries.size());

  for (const auto& parent : level.entries) {
    for (std::size_t a = 0; a < m; ++a) {
      PrefixEntry child;
      child.mass1.assign(n1, 0.0);
      child.mass2.assign(n2, 0.0);
      for (std::size_t t : chain1.states_with_label(a)) {
        double v = 0.0;
        for (std::size_t s = 0; s < n1; ++s)
          v += parent.mass1[s] * chain1.transitions()[s][t];
        child.mass1[t] = v;
        child.total1 += v;
      }
      for (std::size_t t : chain2.states_with_label(a)) {
        double v = 0.0;
        for (std::size_t s = 0; s < n2; ++s)
          v += parent.mass2[s] * chain2.transitions()[s][t];
        child.mass2[t] = v;
        child.total2 += v;
      }
      if (child.total1 <= options.prune_threshold &&
          child.total2 <= options.prune_threshold) {
        if (child.total1 > 0.0 || child.total2 > 0.0) next.lossy = true;
        continue;
      }
      child.word = parent.word;
      child.word.push_back(static_cast<Label>(a));
      next.entries.push_back(std::move(child));
    }
  }
  detail::finalize_level(next);
  return next;
}

/// Half-sum total variation over the level's words. For complete levels (no
/// positive-mass pruning) this agrees with level.tv within 1e-12.
inline double tv_direct(const PrefixLevel& level) {
  double sum = 0.0;
  for (const auto& e : level.entries) sum += std::abs(e.total1 - e.total2);
  return 0.5 * sum;
}

/// Entry lookup by word; nullptr when the word was pruned. Entries are
/// lexicographically sorted so a binary search suffices.
inline const PrefixEntry* find_word(const PrefixLevel& level, const Word& word) {
  auto it = std::lower_bound(
      level.entries.begin(), level.entries.end(), word,
      [](const PrefixEntry& e, const Word& w) { return e.word < w; });
  if (it == level.entries.end() || it->word != word) return nullptr;
  return &*it;
}

}  // namespace ckdist
