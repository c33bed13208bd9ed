#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ckdist/distances.hpp"
#include "ckdist/errors.hpp"
#include "ckdist/lmc.hpp"
#include "ckdist/trace.hpp"

namespace ckdist {

/// Parameters p_1..p_k of a product distribution over {0,1}^k: coordinate i
/// equals 1 with probability p_i, independently.
struct ProductSpec {
  std::vector<double> params;

  std::size_t length() const { return params.size(); }
};

namespace detail {
inline void require_valid_spec(const ProductSpec& spec) {
  if (spec.params.empty())
    throw Error(Errc::OutOfRange, "product spec needs at least one parameter");
  for (double p : spec.params)
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(Errc::OutOfRange, "product parameter outside [0, 1]");
}
}  // namespace detail

/**
 * The 2k-state chain over alphabet {0,1} whose length-i traces are exactly
 * the product distribution of the first i parameters (for i <= k); past k all
 * mass extends by label 0. States are named "0_i" / "1_i"; layer i is reached
 * at step i, with the two k-th layer states absorbing into "0_k".
 */
inline LabeledMarkovChain encode_product(const ProductSpec& spec) {
  detail::require_valid_spec(spec);
  const std::size_t k = spec.length();
  const std::size_t n = 2 * k;
  const auto zero_at = [](std::size_t i) { return i - 1; };        // index of 0_i
  const auto one_at = [&](std::size_t i) { return k + i - 1; };    // index of 1_i

  RawChain raw;
  raw.labels = {"0", "1"};
  raw.states.resize(n);
  raw.state_labels.resize(n);
  for (std::size_t i = 1; i <= k; ++i) {
    raw.states[zero_at(i)] = "0_" + std::to_string(i);
    raw.state_labels[zero_at(i)] = "0";
    raw.states[one_at(i)] = "1_" + std::to_string(i);
    raw.state_labels[one_at(i)] = "1";
  }
  raw.initial.assign(n, 0.0);
  raw.initial[one_at(1)] = spec.params[0];
  raw.initial[zero_at(1)] = 1.0 - spec.params[0];
  raw.transitions.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 2; i <= k; ++i) {
    const double p = spec.params[i - 1];
    raw.transitions[zero_at(i - 1)][one_at(i)] = p;
    raw.transitions[zero_at(i - 1)][zero_at(i)] = 1.0 - p;
    raw.transitions[one_at(i - 1)][one_at(i)] = p;
    raw.transitions[one_at(i - 1)][zero_at(i)] = 1.0 - p;
  }
  raw.transitions[zero_at(k)][zero_at(k)] = 1.0;
  raw.transitions[one_at(k)][zero_at(k)] = 1.0;
  return validate(raw);
}

/// Direct TV between two product distributions: half the l1 difference over
/// all 2^k outcomes. Guarded at k <= 20.
inline double product_tv_bruteforce(const ProductSpec& spec1, const ProductSpec& spec2) {
  detail::require_valid_spec(spec1);
  detail::require_valid_spec(spec2);
  if (spec1.length() != spec2.length())
    throw Error(Errc::LengthMismatch, "product specs of different length");
  const std::size_t k = spec1.length();
  if (k > 20)
    throw Error(Errc::TooLarge, "2^" + std::to_string(k) + " outcomes exceed the guard");

  double sum = 0.0;
  for (std::size_t bits = 0; bits < (std::size_t{1} << k); ++bits) {
    double pp = 1.0, qq = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      // Coordinate order matches the lexicographic word layout: the first
      // character is the most significant bit.
      const bool one = (bits >> (k - 1 - i)) & 1;
      pp *= one ? spec1.params[i] : 1.0 - spec1.params[i];
      qq *= one ? spec2.params[i] : 1.0 - spec2.params[i];
    }
    sum += std::abs(pp - qq);
  }
  return 0.5 * sum;
}

/**
 * TV recovered from two truncated CK sums of the encoder chains:
 *
 *   TV(p^k, q^k) = m^k (S_k - S_{k-1}) / (m - 1)
 *
 * The encoders use m = 2, where the (m-1) divisor vanishes; it is kept so the
 * expression matches the general (m-1)/m^i series weights.
 */
inline double tv_via_sk_difference(const ProductSpec& spec1, const ProductSpec& spec2,
                                   int k, const TraceOptions& options = {}) {
  if (spec1.length() != spec2.length() ||
      spec1.length() != static_cast<std::size_t>(k))
    throw Error(Errc::LengthMismatch, "k must equal the length of both specs");
  const auto chain1 = encode_product(spec1);
  const auto chain2 = encode_product(spec2);
  const auto report = ck_truncated(chain1, chain2, k, options);
  const double s_k = report.s_k;
  const double s_km1 = k >= 2 ? report.per_horizon[static_cast<std::size_t>(k) - 2]
                                    .partial_sum
                              : 0.0;
  const std::size_t m = chain1.alphabet_size();
  return pow_int(m, k) * (s_k - s_km1) / static_cast<double>(m - 1);
}

/**
 * TV recovered through the triangular linear system relating the exact CK
 * distances d_i = d(Sigma_{p^i}, Sigma_{q^i}) of the prefix encoders to the
 * finite-horizon TVs:
 *
 *   d_i = sum_{j<i} ((m-1)/m^j) TV_j  +  m^{1-i} TV_i
 *
 * For encoder chains the CK series terminates (TV_j stays constant past the
 * encoder length), so each d_i is computed exactly from the level TVs of the
 * i-prefix encoders; forward substitution then recovers TV_k. Builds k chain
 * pairs, guarded at k <= 12.
 */
inline double tv_via_linear_system(const ProductSpec& spec1, const ProductSpec& spec2,
                                   int k, const TraceOptions& options = {}) {
  if (spec1.length() != spec2.length() ||
      spec1.length() != static_cast<std::size_t>(k))
    throw Error(Errc::LengthMismatch, "k must equal the length of both specs");
  if (k > 12)
    throw Error(Errc::TooLarge, "linear-system route builds k chain pairs; k <= 12");

  const std::size_t m = 2;
  std::vector<double> d(static_cast<std::size_t>(k) + 1, 0.0);
  for (int i = 1; i <= k; ++i) {
    ProductSpec prefix1{{spec1.params.begin(), spec1.params.begin() + i}};
    ProductSpec prefix2{{spec2.params.begin(), spec2.params.begin() + i}};
    const auto chain1 = encode_product(prefix1);
    const auto chain2 = encode_product(prefix2);
    PrefixLevel level = initial_level(chain1, chain2);
    double series = 0.0;
    for (int j = 1; j <= i; ++j) {
      if (j > 1) level = extend(level, chain1, chain2, options);
      if (j < i)
        series += horizon_weight(m, j) * level.tv;
      else
        series += level.tv / pow_int(m, i - 1);  // m^{1-i} tail weight
    }
    d[static_cast<std::size_t>(i)] = series;
  }

  std::vector<double> tv(static_cast<std::size_t>(k) + 1, 0.0);
  for (int i = 1; i <= k; ++i) {
    double acc = d[static_cast<std::size_t>(i)];
    for (int j = 1; j < i; ++j)
      acc -= horizon_weight(m, j) * tv[static_cast<std::size_t>(j)];
    tv[static_cast<std::size_t>(i)] = acc * pow_int(m, i - 1);
  }
  return tv[static_cast<std::size_t>(k)];
}

}  // namespace ckdist
