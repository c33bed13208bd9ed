#pragma once

#include <stdexcept>
#include <string>

namespace ckdist {

/// Failure categories raised across the library. The identifiers double as
/// the structured message prefixes printed by the CLI.
enum class Errc {
  ParseError,
  IoError,
  NonStochasticRow,
  BadInitialMass,
  UnknownLabel,
  AlphabetTooSmall,
  AlphabetMismatch,
  LabelMismatch,
  OutOfRange,
  LengthMismatch,
  NonMonotoneM,
  NodeBudgetExceeded,
  TooManyStates,
  TooLarge,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::NonStochasticRow: return "NonStochasticRow";
    case Errc::BadInitialMass: return "BadInitialMass";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::AlphabetTooSmall: return "AlphabetTooSmall";
    case Errc::AlphabetMismatch: return "AlphabetMismatch";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::NonMonotoneM: return "NonMonotoneM";
    case Errc::NodeBudgetExceeded: return "NodeBudgetExceeded";
    case Errc::TooManyStates: return "TooManyStates";
    case Errc::TooLarge: return "TooLarge";
  }
  return "Error";
}

/// Process exit code convention: 1 = I/O or parse, 2 = validation,
/// 3 = computation guard (budget or scale).
inline int errc_exit_code(Errc c) {
  switch (c) {
    case Errc::ParseError:
    case Errc::IoError:
      return 1;
    case Errc::NodeBudgetExceeded:
    case Errc::TooManyStates:
    case Errc::TooLarge:
      return 3;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }
  int exit_code() const noexcept { return errc_exit_code(code_); }

 private:
  Errc code_;
};

}  // namespace ckdist
