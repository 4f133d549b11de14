#include "meshplace/error.hpp"

namespace meshplace {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kBehindCamera: return "behind-camera";
    case ErrorCode::kInvalidDepth: return "invalid-depth";
    case ErrorCode::kFormat: return "format-error";
    case ErrorCode::kEmptyGeometry: return "empty-geometry";
    case ErrorCode::kEmptyMask: return "empty-mask";
    case ErrorCode::kDegenerateBox: return "degenerate-box";
    case ErrorCode::kSizeMismatch: return "size-mismatch";
    case ErrorCode::kNoCandidate: return "no-candidate";
    case ErrorCode::kDegenerateContact: return "degenerate-contact";
    case ErrorCode::kMissingSupportDepth: return "missing-support-depth";
    case ErrorCode::kKeypointOffMesh: return "keypoint-off-mesh";
    case ErrorCode::kDegenerateKeypoints: return "degenerate-keypoints";
    case ErrorCode::kEmptyEvaluation: return "empty-evaluation";
    case ErrorCode::kFrustum: return "frustum-error";
    case ErrorCode::kInput: return "input-error";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoCandidate:
    case ErrorCode::kKeypointOffMesh:
      return ErrorClass::kMatching;
    case ErrorCode::kBehindCamera:
    case ErrorCode::kInvalidDepth:
    case ErrorCode::kEmptyGeometry:
    case ErrorCode::kDegenerateBox:
    case ErrorCode::kDegenerateContact:
    case ErrorCode::kMissingSupportDepth:
    case ErrorCode::kDegenerateKeypoints:
    case ErrorCode::kFrustum:
      return ErrorClass::kDegenerateGeometry;
    case ErrorCode::kIo:
      return ErrorClass::kIo;
    default:
      return ErrorClass::kInput;
  }
}

std::string Error::describe() const {
  std::string out;
  if (!stage_.empty()) {
    out += stage_;
    out += ": ";
  }
  out += to_string(code_);
  out += ": ";
  out += what();
  return out;
}

}  // namespace meshplace
