#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ckdist/errors.hpp"

namespace ckdist {

namespace detail {
inline void require_alphabet(std::size_t m) {
  if (m < 2) throw Error(Errc::AlphabetTooSmall, "alphabet size must be at least 2");
}
inline void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0))
    throw Error(Errc::OutOfRange, std::string(what) + " must lie in (0, 1)");
}
}  // namespace detail

/// CK distance of two delta-approximately bisimilar chains is at most
/// m*delta / (m - 1 + delta). Strictly increasing in delta, decreasing in m.
inline double ck_upper_bound(double delta, std::size_t m) {
  detail::require_alphabet(m);
  detail::require_open_unit(delta, "delta");
  const double md = static_cast<double>(m);
  return (md * delta) / ((md - 1.0) + delta);
}

/// Inverse reading of the bound: knowing d >= d_lower, the chains cannot be
/// delta-approximately bisimilar for any delta <= (m-1)*d_lower / (m - d_lower).
inline double bisim_impossibility_threshold(double d_lower, std::size_t m) {
  detail::require_alphabet(m);
  if (!(d_lower > 0.0 && d_lower <= 1.0))
    throw Error(Errc::OutOfRange, "d_lower must lie in (0, 1]");
  const double md = static_cast<double>(m);
  return (md - 1.0) * d_lower / (md - d_lower);
}

/// Finite-horizon TV bound for delta-approximately bisimilar chains:
/// TV(p_1^k, p_2^k) <= 1 - (1-delta)^k.
inline double tv_bisim_bound(double delta, std::int64_t k) {
  detail::require_open_unit(delta, "delta");
  if (k < 0) throw Error(Errc::OutOfRange, "horizon must be nonnegative");
  return 1.0 - std::pow(1.0 - delta, static_cast<double>(k));
}

/// Finite-horizon TV bound from a CK upper bound: TV(p_1^k, p_2^k) <=
/// m^{k-1} * d_upper, clamped at 1 where the bound goes vacuous.
inline double tv_from_ck_bound(double d_upper, std::int64_t k, std::size_t m) {
  detail::require_alphabet(m);
  detail::require_open_unit(d_upper, "d_upper");
  if (k < 1) throw Error(Errc::OutOfRange, "horizon must be at least 1");
  const long double raw = std::pow(static_cast<long double>(m),
                                   static_cast<long double>(k - 1)) *
                          static_cast<long double>(d_upper);
  return raw >= 1.0L ? 1.0 : static_cast<double>(raw);
}

/// Largest horizon k with m^{k-1} * d_upper <= epsilon, i.e. the longest
/// horizon over which trace probabilities are still within epsilon. Returns 0
/// when d_upper already exceeds epsilon (no horizon is safe).
inline std::int64_t max_safe_horizon(double epsilon, double d_upper, std::size_t m) {
  detail::require_alphabet(m);
  detail::require_open_unit(epsilon, "epsilon");
  detail::require_open_unit(d_upper, "d_upper");
  if (d_upper > epsilon) return 0;
  std::int64_t k =
      1 + static_cast<std::int64_t>(std::floor(
              std::log(epsilon / d_upper) / std::log(static_cast<double>(m))));
  const auto safe = [&](std::int64_t kk) {
    return std::pow(static_cast<long double>(m), static_cast<long double>(kk - 1)) *
               static_cast<long double>(d_upper) <=
           static_cast<long double>(epsilon);
  };
  if (k < 1) k = 1;
  while (!safe(k)) --k;
  while (safe(k + 1)) ++k;
  return k;
}

}  // namespace ckdist
