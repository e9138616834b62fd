#include "cfbench/error.hpp"

namespace cfb {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::NonUniformTimestep: return "NonUniformTimestep";
    case Errc::CollisionInData: return "CollisionInData";
    case Errc::TooShort: return "TooShort";
    case Errc::SegmentTooShort: return "SegmentTooShort";
    case Errc::CollisionDuringSynthesis: return "CollisionDuringSynthesis";
    case Errc::NonPositiveSpacing: return "NonPositiveSpacing";
    case Errc::UnknownModelKind: return "UnknownModelKind";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SingularKernelMatrix: return "SingularKernelMatrix";
    case Errc::AllRestartsFailed: return "AllRestartsFailed";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::DivergedToNonFinite: return "DivergedToNonFinite";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::EmptyOverlap: return "EmptyOverlap";
    case Errc::DuplicateCell: return "DuplicateCell";
    case Errc::SingleLevelFactor: return "SingleLevelFactor";
    case Errc::PerfectCollinearity: return "PerfectCollinearity";
    case Errc::TooFewRows: return "TooFewRows";
    case Errc::InvalidDof: return "InvalidDof";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace cfb
