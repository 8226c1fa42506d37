// Copyright 2026 The isc-tee-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ISCTEE_ERRORS_HPP_
#define ISCTEE_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace isctee {

enum class ErrorCode {
  kEventCapExceeded,
  kNegativeDelay,
  kOutOfBounds,
  kReadOfFreePage,
  kProgramOfNonFreePage,
  kPermissionDenied,
  kUnmappedLpa,
  kDeviceFull,
  kAlreadyOwned,
  kFault,
  kWriteToReadOnly,
  kIntegrityViolation,
  kBadLength,
  kNoFreeId,
  kOutOfMemory,
  kUnknownTee,
  kDuplicateTid,
  kNotFinished,
  kAborted,
  kInvalidState,
  kProgramException,
  kConfigError,
  kSchemaMismatch,
};

std::string_view to_string(ErrorCode code);

// All simulator failures surface as SimError; callers switch on code().
class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace isctee

#endif  // ISCTEE_ERRORS_HPP_
