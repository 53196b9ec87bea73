#pragma once

#include <stdexcept>
#include <string>

namespace roadstereo {

enum class ErrorKind {
  kIo,
  kInvalidArgument,
  kConfig,
  kInsufficientPlaneEvidence,
  kTexturelessBlock,
  kInsufficientRollEvidence,
  kDegeneratePlane,
  kDegenerateScene,
  kEmptyEvaluation,
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Pipeline stage an error kind is attributed to, used for CLI exit codes.
const char* stage_name(ErrorKind kind) noexcept;
int exit_code(ErrorKind kind) noexcept;

}  // namespace roadstereo
