#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace paged {

enum class ErrorCode {
  kParameter,
  kUndefinedConstant,
  kEvaluation,
  kQuery,
  kProtocol,
  kAssignment,
  kDepleted,
  kConfig,
  kRun,
  kFit,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// The sampler ran dry (or there was nothing left to delete) at step t.
class DepletedError : public Error {
 public:
  explicit DepletedError(std::int64_t t);

  std::int64_t t() const { return t_; }

 private:
  std::int64_t t_;
};

}  // namespace paged
