#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace meshplace {

enum class ErrorCode {
  kInvalidParameter,
  kBehindCamera,
  kInvalidDepth,
  kFormat,
  kEmptyGeometry,
  kEmptyMask,
  kDegenerateBox,
  kSizeMismatch,
  kNoCandidate,
  kDegenerateContact,
  kMissingSupportDepth,
  kKeypointOffMesh,
  kDegenerateKeypoints,
  kEmptyEvaluation,
  kFrustum,
  kInput,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Coarse grouping used for CLI exit codes.
enum class ErrorClass { kInput, kMatching, kDegenerateGeometry, kIo };

ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Copy of this error tagged with the pipeline stage that raised it.
  Error with_stage(std::string stage) const { return Error(code_, what(), std::move(stage)); }

  /// "stage: code: message" when a stage is set.
  std::string describe() const;

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace meshplace
