// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef DPAGG_ERROR_H_
#define DPAGG_ERROR_H_

#include <stdexcept>
#include <string>

namespace dpagg {

// Error categories. The numeric values double as the CLI's process exit
// codes and are part of the tool contract.
enum class ErrorCode : int {
  kInvalidParameter = 2,
  kIoError = 3,
  kContractViolation = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

inline Error InvalidParameter(const std::string& message) {
  return Error(ErrorCode::kInvalidParameter, message);
}

inline Error IoError(const std::string& message) {
  return Error(ErrorCode::kIoError, message);
}

inline Error ContractViolation(const std::string& message) {
  return Error(ErrorCode::kContractViolation, message);
}

}  // namespace dpagg

#endif  // DPAGG_ERROR_H_
