#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ckdist/errors.hpp"

namespace ckdist {

using json = nlohmann::ordered_json;

/// Row/initial sums must match 1 within this tolerance; rows that fail are
/// rejected rather than renormalized.
inline constexpr double kStochasticTolerance = 1e-9;

/// Unvalidated chain description, as read from a file or built by hand.
/// `state_labels[i]` is the label symbol of `states[i]`.
struct RawChain {
  std::vector<std::string> labels;
  std::vector<std::string> states;
  std::vector<std::string> state_labels;
  std::vector<double> initial;
  std::vector<std::vector<double>> transitions;
};

class LabeledMarkovChain;
LabeledMarkovChain validate(const RawChain& raw);

/**
 * A finite-state Markov chain with an initial distribution, a row-stochastic
 * transition matrix and one label per state. Instances are produced by
 * validate() and are immutable afterwards, so they can be shared freely
 * across threads.
 */
class LabeledMarkovChain {
 public:
  std::size_t num_states() const { return states_.size(); }
  std::size_t alphabet_size() const { return labels_.size(); }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<double>& initial() const { return initial_; }
  const std::vector<std::vector<double>>& transitions() const { return transitions_; }

  /// Label index of a state.
  std::size_t label_of(std::size_t state) const { return labeling_[state]; }
  const std::vector<std::size_t>& labeling() const { return labeling_; }

  /// States carrying a given label, in state-index order (the set [[a]]).
  const std::vector<std::size_t>& states_with_label(std::size_t label) const {
    return by_label_[label];
  }

  /// Index of a state by name; throws UnknownLabel if absent.
  std::size_t state_index(std::string_view name) const {
    for (std::size_t i = 0; i < states_.size(); ++i)
      if (states_[i] == name) return i;
    throw Error(Errc::UnknownLabel, "no state named '" + std::string(name) + "'");
  }

 private:
  friend LabeledMarkovChain validate(const RawChain& raw);
  LabeledMarkovChain() = default;

  std::vector<std::string> labels_;
  std::vector<std::string> states_;
  std::vector<double> initial_;
  std::vector<std::vector<double>> transitions_;
  std::vector<std::size_t> labeling_;
  std::vector<std::vector<std::size_t>> by_label_;
};

namespace detail {
inline std::string fmt_sum(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace detail

/**
 * Checks every structural invariant of a chain description and returns the
 * immutable chain. Rows whose sum misses 1 beyond the tolerance are rejected;
 * nothing is renormalized silently.
 */
inline LabeledMarkovChain validate(const RawChain& raw) {
  const std::size_t m = raw.labels.size();
  if (m < 2)
    throw Error(Errc::AlphabetTooSmall,
                "alphabet has " + std::to_string(m) + " label(s); need at least 2");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (raw.labels[i] == raw.labels[j])
        throw Error(Errc::ParseError, "duplicate label '" + raw.labels[i] + "'");

  const std::size_t n = raw.states.size();
  if (n == 0) throw Error(Errc::ParseError, "chain has no states");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (raw.states[i] == raw.states[j])
        throw Error(Errc::ParseError, "duplicate state name '" + raw.states[i] + "'");
  if (raw.state_labels.size() != n)
    throw Error(Errc::ParseError, "every state needs exactly one label");

  std::vector<std::size_t> labeling(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t idx = m;
    for (std::size_t a = 0; a < m; ++a)
      if (raw.labels[a] == raw.state_labels[s]) { idx = a; break; }
    if (idx == m)
      throw Error(Errc::UnknownLabel, "state '" + raw.states[s] + "' has label '" +
                                          raw.state_labels[s] + "' not in the alphabet");
    labeling[s] = idx;
  }

  if (raw.initial.size() != n)
    throw Error(Errc::ParseError, "initial vector length " +
                                      std::to_string(raw.initial.size()) +
                                      " does not match " + std::to_string(n) + " states");
  double mu_sum = 0.0;
  for (double v : raw.initial) {
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(Errc::BadInitialMass, "initial entry " + detail::fmt_sum(v) +
                                            " outside [0, 1]");
    mu_sum += v;
  }
  if (std::abs(mu_sum - 1.0) > kStochasticTolerance)
    throw Error(Errc::BadInitialMass, "initial distribution sums to " +
                                          detail::fmt_sum(mu_sum));

  if (raw.transitions.size() != n)
    throw Error(Errc::ParseError, "transition matrix must have one row per state");
  for (std::size_t s = 0; s < n; ++s) {
    const auto& row = raw.transitions[s];
    if (row.size() != n)
      throw Error(Errc::ParseError, "transition row for state '" + raw.states[s] +
                                        "' has wrong length");
    double row_sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(Errc::NonStochasticRow, "row for state '" + raw.states[s] +
                                                "' has entry " + detail::fmt_sum(v) +
                                                " outside [0, 1]");
      row_sum += v;
    }
    if (std::abs(row_sum - 1.0) > kStochasticTolerance)
      throw Error(Errc::NonStochasticRow, "row for state '" + raw.states[s] +
                                              "' sums to " + detail::fmt_sum(row_sum));
  }

  LabeledMarkovChain chain;
  chain.labels_ = raw.labels;
  chain.states_ = raw.states;
  chain.initial_ = raw.initial;
  chain.transitions_ = raw.transitions;
  chain.labeling_ = std::move(labeling);
  chain.by_label_.assign(m, {});
  for (std::size_t s = 0; s < n; ++s) chain.by_label_[chain.labeling_[s]].push_back(s);
  return chain;
}

/// Two chains are comparable only when their label lists are identical as
/// ordered sequences.
inline bool same_alphabet(const LabeledMarkovChain& a, const LabeledMarkovChain& b) {
  return a.labels() == b.labels();
}

inline void require_same_alphabet(const LabeledMarkovChain& a,
                                  const LabeledMarkovChain& b) {
  if (!same_alphabet(a, b))
    throw Error(Errc::AlphabetMismatch, "chains are defined on different label sets");
}

/// True when the two chains generate the same trace distributions for the
/// trivial reason that their data (alphabet, initial vector, kernel and
/// labeling) are bitwise identical. State names are ignored.
inline bool identical_dynamics(const LabeledMarkovChain& a,
                               const LabeledMarkovChain& b) {
  return a.labels() == b.labels() && a.num_states() == b.num_states() &&
         a.labeling() == b.labeling() && a.initial() == b.initial() &&
         a.transitions() == b.transitions();
}

// --- file format ------------------------------------------------------------
//
// { "labels": ["V","C"],
//   "states": [{"name":"v","label":"V"}, {"name":"c","label":"C"}],
//   "initial": [0.5, 0.5],
//   "transitions": [[0.128, 0.872], [0.663, 0.337]] }
//
// The order of "states" fixes all index semantics.

inline RawChain chain_from_json(const json& j) {
  RawChain raw;
  try {
    if (!j.is_object()) throw Error(Errc::ParseError, "chain document must be an object");
    for (const char* field : {"labels", "states", "initial", "transitions"})
      if (!j.contains(field))
        throw Error(Errc::ParseError, std::string("missing field '") + field + "'");
    raw.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& st : j.at("states")) {
      raw.states.push_back(st.at("name").get<std::string>());
      raw.state_labels.push_back(st.at("label").get<std::string>());
    }
    raw.initial = j.at("initial").get<std::vector<double>>();
    raw.transitions = j.at("transitions").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  return raw;
}

inline json chain_to_json(const LabeledMarkovChain& chain) {
  json j;
  j["labels"] = chain.labels();
  json states = json::array();
  for (std::size_t s = 0; s < chain.num_states(); ++s)
    states.push_back({{"name", chain.states()[s]},
                      {"label", chain.labels()[chain.label_of(s)]}});
  j["states"] = std::move(states);
  j["initial"] = chain.initial();
  j["transitions"] = chain.transitions();
  return j;
}

inline LabeledMarkovChain load_chain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
  return validate(chain_from_json(j));
}

inline void save_chain(const LabeledMarkovChain& chain,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  out << chain_to_json(chain).dump(2) << '\n';
}

// --- the Onegin example chain -----------------------------------------------

/// Markov's vowel/consonant chain for Eugene Onegin. The initial distribution
/// is uniform; it is part of this library's definition of the example and is
/// stored explicitly in the shipped data files.
inline LabeledMarkovChain onegin() {
  RawChain raw;
  raw.labels = {"V", "C"};
  raw.states = {"v", "c"};
  raw.state_labels = {"V", "C"};
  raw.initial = {0.5, 0.5};
  raw.transitions = {{0.128, 0.872}, {0.663, 0.337}};
  return validate(raw);
}

/// The biased variant: epsilon is added to the vowel self-loop and to the
/// consonant-to-vowel edge, and subtracted from the two others. epsilon is
/// accepted in [0, 0.128].
inline LabeledMarkovChain bias_onegin(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 0.128))
    throw Error(Errc::OutOfRange,
                "bias epsilon " + detail::fmt_sum(epsilon) + " outside [0, 0.128]");
  RawChain raw;
  raw.labels = {"V", "C"};
  raw.states = {"v", "c"};
  raw.state_labels = {"V", "C"};
  raw.initial = {0.5, 0.5};
  raw.transitions = {{0.128 + epsilon, 0.872 - epsilon},
                     {0.663 + epsilon, 0.337 - epsilon}};
  return validate(raw);
}

}  // namespace ckdist
