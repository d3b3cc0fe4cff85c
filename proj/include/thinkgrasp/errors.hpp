// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace thinkgrasp {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scene construction / placement failure after bounded retries.
struct GenerationError : Error {
  using Error::Error;
};

/// Unknown object id, degenerate query, or other lookup failure.
struct LookupError : Error {
  using Error::Error;
};

/// A grasp candidate whose contacts touch no object surface.
struct InvalidCandidateError : Error {
  using Error::Error;
};

/// Selector output that does not follow the expected text format.
struct ParseError : Error {
  using Error::Error;
};

/// No object (or part) could be selected from the current view.
struct SelectionError : Error {
  using Error::Error;
};

/// A crop that covers no cloud points; the planner re-selects.
struct EmptyCropError : Error {
  using Error::Error;
};

/// A contact pair that is not antipodal even at mu = 1.
struct NoScoreError : Error {
  using Error::Error;
};

/// A plan_step stage came up empty after all fallbacks.
struct StepSkipError : Error {
  using Error::Error;
};

/// Malformed scene / suite / results file.
struct FileFormatError : Error {
  using Error::Error;
};

}  // namespace thinkgrasp
