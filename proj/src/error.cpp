#include "paged/error.hpp"

namespace paged {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParameter: return "parameter error";
    case ErrorCode::kUndefinedConstant: return "undefined constant";
    case ErrorCode::kEvaluation: return "evaluation error";
    case ErrorCode::kQuery: return "query error";
    case ErrorCode::kProtocol: return "protocol error";
    case ErrorCode::kAssignment: return "assignment impossible";
    case ErrorCode::kDepleted: return "depleted";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kRun: return "run error";
    case ErrorCode::kFit: return "fit error";
  }
  return "unknown error";
}

DepletedError::DepletedError(std::int64_t t)
    : Error(ErrorCode::kDepleted,
            "graph depleted at t=" + std::to_string(t)),
      t_(t) {}

}  // namespace paged
