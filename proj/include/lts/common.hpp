#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace lts {

using VertexId = std::int64_t;
using Rank = std::int64_t;

inline constexpr VertexId kNoVertex = -1;
inline constexpr Rank kRankMax = std::numeric_limits<Rank>::max();

enum class ErrorCode {
  InvalidArgument,
  VertexOutOfRange,
  ParseError,
  NonTriangleFace,
  NonManifoldEdge,
  NonFiniteValue,
  SizeMismatch,
  NotAnExtremum,
  ConstraintNotExtremum,
  IterationCapExceeded,
  KeyCollision,
  MeshHasBoundary,
  RestorationConflict,
  ReachedGlobalExtremum,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::VertexOutOfRange: return "VertexOutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonTriangleFace: return "NonTriangleFace";
    case ErrorCode::NonManifoldEdge: return "NonManifoldEdge";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NotAnExtremum: return "NotAnExtremum";
    case ErrorCode::ConstraintNotExtremum: return "ConstraintNotExtremum";
    case ErrorCode::IterationCapExceeded: return "IterationCapExceeded";
    case ErrorCode::KeyCollision: return "KeyCollision";
    case ErrorCode::MeshHasBoundary: return "MeshHasBoundary";
    case ErrorCode::RestorationConflict: return "RestorationConflict";
    case ErrorCode::ReachedGlobalExtremum: return "ReachedGlobalExtremum";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lts
