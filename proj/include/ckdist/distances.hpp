#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ckdist/errors.hpp"
#include "ckdist/lmc.hpp"
#include "ckdist/trace.hpp"

namespace ckdist {

/// m^e as an exact double (exact while m^e < 2^53).
inline double pow_int(std::size_t base, int exponent) {
  double p = 1.0;
  for (int i = 0; i < exponent; ++i) p *= static_cast<double>(base);
  return p;
}

/// The a-priori truncation error of S_k: m^{-k}.
inline double truncation_error_bound(std::size_t m, int k) {
  return 1.0 / pow_int(m, k);
}

/// Discount weight of horizon i in the CK series: (m-1)/m^i.
inline double horizon_weight(std::size_t m, int i) {
  return static_cast<double>(m - 1) / pow_int(m, i);
}

/**
 * Ultrametric distance on words: m^{-(i-1)} where i is the first position at
 * which the words differ, 0 for equal words, 1 when the first characters
 * already differ. Finite words must have equal length.
 */
inline double cantor_distance(const Word& w1, const Word& w2, std::size_t m) {
  if (w1.size() != w2.size())
    throw Error(Errc::LengthMismatch, "words of length " + std::to_string(w1.size()) +
                                          " and " + std::to_string(w2.size()));
  for (std::size_t i = 0; i < w1.size(); ++i)
    if (w1[i] != w2[i]) return 1.0 / pow_int(m, static_cast<int>(i));
  return 0.0;
}

/**
 * A distribution over all words of a fixed length, stored densely in
 * lexicographic order (index digits in base `alphabet_size`, most significant
 * digit = first character).
 */
struct WordDistribution {
  std::size_t word_length = 0;
  std::size_t alphabet_size = 0;
  std::vector<double> mass;

  std::size_t support_size() const { return mass.size(); }
};

inline Word word_from_index(std::size_t index, std::size_t length, std::size_t m) {
  Word w(length);
  for (std::size_t pos = length; pos-- > 0;) {
    w[pos] = static_cast<Label>(index % m);
    index /= m;
  }
  return w;
}

/// Number of words of length k over m labels, guarded against overflow.
inline std::size_t word_count(std::size_t m, std::size_t k) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (n > (std::size_t{1} << 62) / m)
      throw Error(Errc::TooLarge, "word space m^k does not fit");
    n *= m;
  }
  return n;
}

/**
 * Min-mass sums M_1..M_k of two distributions over the same word space:
 * M_i sums, over all length-i prefixes, the smaller of the two prefix
 * masses. Prefix masses are contiguous block sums in the dense layout.
 */
inline std::vector<double> prefix_min_sums(const WordDistribution& p,
                                           const WordDistribution& q) {
  if (p.alphabet_size != q.alphabet_size)
    throw Error(Errc::AlphabetMismatch, "distributions over different alphabets");
  if (p.word_length != q.word_length)
    throw Error(Errc::LengthMismatch, "distributions over words of different length");
  const std::size_t m = p.alphabet_size;
  const std::size_t k = p.word_length;
  const std::size_t total = word_count(m, k);
  if (p.mass.size() != total || q.mass.size() != total)
    throw Error(Errc::OutOfRange, "mass vector size does not match m^k");

  std::vector<double> sums;
  sums.reserve(k);
  std::size_t prefixes = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    prefixes *= m;
    const std::size_t block = total / prefixes;
    double m_i = 0.0;
    for (std::size_t pre = 0; pre < prefixes; ++pre) {
      double ps = 0.0, qs = 0.0;
      for (std::size_t off = 0; off < block; ++off) {
        ps += p.mass[pre * block + off];
        qs += q.mass[pre * block + off];
      }
      m_i += std::min(ps, qs);
    }
    sums.push_back(std::min(m_i, 1.0));
  }
  return sums;
}

/**
 * Closed-form Kantorovich distance under the Cantor metric from the min-mass
 * sums M_1..M_k:
 *
 *   K = 1 - M_1 + sum_{i=1}^{k-1} m^{-i} (M_i - M_{i+1})
 *
 * The M list must be nonincreasing (within 1e-12) with values in [0, 1].
 */
inline double kantorovich_closed_form(std::span<const double> min_sums,
                                      std::size_t m) {
  if (min_sums.empty())
    throw Error(Errc::OutOfRange, "need at least M_1");
  for (double v : min_sums)
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
      throw Error(Errc::OutOfRange, "min-mass sum outside [0, 1]");
  for (std::size_t i = 0; i + 1 < min_sums.size(); ++i)
    if (min_sums[i + 1] > min_sums[i] + 1e-12)
      throw Error(Errc::NonMonotoneM,
                  "M_" + std::to_string(i + 2) + " exceeds M_" + std::to_string(i + 1));

  double k_c = 1.0 - min_sums[0];
  for (std::size_t i = 0; i + 1 < min_sums.size(); ++i)
    k_c += (min_sums[i] - min_sums[i + 1]) / pow_int(m, static_cast<int>(i) + 1);
  return k_c;
}

/// Finite-horizon Kantorovich distance between two raw word distributions
/// under the Cantor metric (closed-form route).
inline double kantorovich_cantor(const WordDistribution& p, const WordDistribution& q) {
  return kantorovich_closed_form(prefix_min_sums(p, q), p.alphabet_size);
}

// --- truncated CK distance ---------------------------------------------------

struct CkHorizonRow {
  int horizon;
  double tv;           // TV(p_1^i, p_2^i) = 1 - M_i
  double weight;       // (m-1)/m^i
  double partial_sum;  // S_i
};

/**
 * Truncated CK sum S_k with its certified a-priori error bound: the true
 * distance lies in [s_k, s_k + error_bound]. The per-horizon trace is kept so
 * a regression localizes to a horizon. `certified` is false when threshold
 * pruning was enabled.
 */
struct CkReport {
  std::vector<CkHorizonRow> per_horizon;
  int horizon = 0;
  double s_k = 0.0;
  double error_bound = 0.0;
  bool certified = true;
};

/**
 * Computes S_k = sum_{i=1}^k ((m-1)/m^i) TV(p_1^i, p_2^i) by walking the
 * joint prefix tree level by level.
 *
 * Chains with bitwise-identical data are answered without enumeration: every
 * level of the tree is then the same deterministic computation on both sides,
 * so every TV_i is exactly zero.
 */
inline CkReport ck_truncated(const LabeledMarkovChain& chain1,
                             const LabeledMarkovChain& chain2, int horizon,
                             const TraceOptions& options = {}) {
  require_same_alphabet(chain1, chain2);
  if (horizon < 1)
    throw Error(Errc::OutOfRange, "horizon must be at least 1");
  const std::size_t m = chain1.alphabet_size();

  CkReport report;
  report.horizon = horizon;
  report.error_bound = truncation_error_bound(m, horizon);
  report.certified = !(options.prune_threshold > 0.0);
  report.per_horizon.reserve(static_cast<std::size_t>(horizon));

  if (identical_dynamics(chain1, chain2)) {
    double s = 0.0;
    for (int i = 1; i <= horizon; ++i)
      report.per_horizon.push_back({i, 0.0, horizon_weight(m, i), s});
    report.s_k = s;
    return report;
  }

  PrefixLevel level = initial_level(chain1, chain2);
  double s = 0.0;
  for (int i = 1; i <= horizon; ++i) {
    if (i > 1) level = extend(level, chain1, chain2, options);
    const double w = horizon_weight(m, i);
    s += w * level.tv;
    report.per_horizon.push_back({i, level.tv, w, s});
  }
  report.s_k = s;
  if (level.lossy) report.certified = false;
  return report;
}

/// Smallest k with m^{-k} <= epsilon, i.e. k = ceil(log(1/eps) / log(m)).
inline int horizon_for_precision(double epsilon, std::size_t m) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw Error(Errc::OutOfRange, "precision must lie in (0, 1)");
  if (m < 2) throw Error(Errc::AlphabetTooSmall, "alphabet size must be at least 2");
  int k = static_cast<int>(
      std::ceil(std::log(1.0 / epsilon) / std::log(static_cast<double>(m))));
  if (k < 1) k = 1;
  const auto reaches = [&](int kk) {
    return std::pow(static_cast<long double>(m), static_cast<long double>(-kk)) <=
           static_cast<long double>(epsilon);
  };
  while (!reaches(k)) ++k;
  while (k > 1 && reaches(k - 1)) --k;
  return k;
}

}  // namespace ckdist
