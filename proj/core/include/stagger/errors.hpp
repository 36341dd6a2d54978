// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_ERRORS_HPP
#define STAGGER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stagger {

// Stable machine-readable error codes. Every failure surfaced by the library
// carries one of these, so callers (and the CLI's JSON error channel) can
// branch on the code rather than parse messages.
enum class Errc {
  BadConfig,
  DuplicateCell,
  EmptyPanel,
  MixedFrequency,
  UnbalancedPanel,
  NonMonotoneTreatment,
  EmptyWindow,
  BaselineInWindow,
  NotIdentified,
  RankDeficient,
  NoConvergence,
  SingleClass,
  EmptyControlSet,
  MissingBasePeriod,
  OverlapFailure,
  FoldCohortStarvation,
  DisconnectedUntreatedSample,
  GapInPath,
  MissingCell,
  TooFewPrePeriods,
  NoFeasibleB,
  Infeasible,
  Unbounded,
  MissingBaseline,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::BadConfig: return "BadConfig";
    case Errc::DuplicateCell: return "DuplicateCell";
    case Errc::EmptyPanel: return "EmptyPanel";
    case Errc::MixedFrequency: return "MixedFrequency";
    case Errc::UnbalancedPanel: return "UnbalancedPanel";
    case Errc::NonMonotoneTreatment: return "NonMonotoneTreatment";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::BaselineInWindow: return "BaselineInWindow";
    case Errc::NotIdentified: return "NotIdentified";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::SingleClass: return "SingleClass";
    case Errc::EmptyControlSet: return "EmptyControlSet";
    case Errc::MissingBasePeriod: return "MissingBasePeriod";
    case Errc::OverlapFailure: return "OverlapFailure";
    case Errc::FoldCohortStarvation: return "FoldCohortStarvation";
    case Errc::DisconnectedUntreatedSample: return "DisconnectedUntreatedSample";
    case Errc::GapInPath: return "GapInPath";
    case Errc::MissingCell: return "MissingCell";
    case Errc::TooFewPrePeriods: return "TooFewPrePeriods";
    case Errc::NoFeasibleB: return "NoFeasibleB";
    case Errc::Infeasible: return "Infeasible";
    case Errc::Unbounded: return "Unbounded";
    case Errc::MissingBaseline: return "MissingBaseline";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

// Exception type used throughout the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace stagger

#endif  // STAGGER_ERRORS_HPP
