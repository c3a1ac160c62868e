#pragma once

#include <stdexcept>
#include <string>

namespace ivo {

// Base class for every recoverable error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct UpToScaleComposition : Error {
  using Error::Error;
};

struct BehindCamera : Error {
  using Error::Error;
};

struct CropOutOfBounds : Error {
  using Error::Error;
};

struct NotDivisible : Error {
  using Error::Error;
};

struct BadMagic : Error {
  using Error::Error;
};

struct TruncatedFile : Error {
  using Error::Error;
};

struct InvalidConfig : Error {
  using Error::Error;
};

struct FrameOutOfRange : Error {
  using Error::Error;
};

// Raised by the pose estimator when too few valid, unmasked pixels remain.
// The pipeline annotates the iteration at which the support collapsed.
struct InsufficientStaticSupport : Error {
  explicit InsufficientStaticSupport(const std::string& msg, int iter = -1)
      : Error(msg), iteration(iter) {}
  int iteration;
};

struct DegenerateMotion : Error {
  using Error::Error;
};

struct NoOverlap : Error {
  using Error::Error;
};

// Binarized mask covers (almost) every valid pixel; no support left to
// estimate ego-motion from.
struct AllDynamic : Error {
  explicit AllDynamic(const std::string& msg, int iter = -1)
      : Error(msg), iteration(iter) {}
  int iteration;
};

struct DegenerateSpread : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& msg, int line_number)
      : Error(msg + " (line " + std::to_string(line_number) + ")"),
        line(line_number) {}
  int line;
};

struct EmptyTrajectory : Error {
  using Error::Error;
};

}  // namespace ivo
