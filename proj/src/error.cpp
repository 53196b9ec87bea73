#include "roadstereo/error.hpp"

namespace roadstereo {

const char* stage_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kIo:
      return "io";
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kInsufficientPlaneEvidence:
      return "plane_prior";
    case ErrorKind::kTexturelessBlock:
      return "matcher";
    case ErrorKind::kInsufficientRollEvidence:
    case ErrorKind::kDegeneratePlane:
      return "geometry";
    case ErrorKind::kDegenerateScene:
      return "synth";
    case ErrorKind::kEmptyEvaluation:
      return "eval";
    case ErrorKind::kInternal:
      return "internal";
  }
  return "internal";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kInsufficientPlaneEvidence:
      return 4;
    case ErrorKind::kTexturelessBlock:
      return 5;
    case ErrorKind::kInsufficientRollEvidence:
    case ErrorKind::kDegeneratePlane:
      return 6;
    case ErrorKind::kDegenerateScene:
      return 7;
    case ErrorKind::kEmptyEvaluation:
      return 8;
    case ErrorKind::kInternal:
      return 70;
  }
  return 70;
}

}  // namespace roadstereo
