#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfb {

enum class Errc {
  MissingColumn,
  NonUniformTimestep,
  CollisionInData,
  TooShort,
  SegmentTooShort,
  CollisionDuringSynthesis,
  NonPositiveSpacing,
  UnknownModelKind,
  DimensionMismatch,
  SingularKernelMatrix,
  AllRestartsFailed,
  ShapeMismatch,
  NonFiniteLoss,
  DivergedToNonFinite,
  LengthMismatch,
  EmptySeries,
  EmptyOverlap,
  DuplicateCell,
  SingleLevelFactor,
  PerfectCollinearity,
  TooFewRows,
  InvalidDof,
  InvalidConfig,
  Io,
  Parse,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace cfb
