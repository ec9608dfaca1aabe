#pragma once

#include <stdexcept>
#include <string>

namespace synsculpt {

// Base for all library errors. The message is the user-facing text the CLI
// prints and the HTTP service returns.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: schema violations, dimension mismatches, NaNs, bad sampling.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inputs built for a different model than the one they are used with.
class ModelMismatchError : public Error {
 public:
  using Error::Error;
};

// A task Jacobian whose smallest singular value fell below the rank threshold.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

// A segment with no velocity content, or too few frames for the requested rank.
class DegenerateSegmentError : public Error {
 public:
  using Error::Error;
};

// A sequence plan whose blend window does not fit between adjacent steps.
class BlendWindowError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace synsculpt
