/*
 * Copyright 2026 The arcard Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arcard {

// Numeric values are part of the C ABI (see arcard.h); append only.
enum class ErrorCode : int {
  kOk = 0,
  kCycleDetected = 1,
  kDisconnected = 2,
  kUnknownColumn = 3,
  kDuplicateName = 4,
  kQueryNotSubtree = 5,
  kBadLiteralType = 6,
  kMissingColumn = 7,
  kTypeParseError = 8,
  kIoError = 9,
  kSchemaMismatch = 10,
  kOverflow = 11,
  kIndexMiss = 12,
  kTokenOutOfRange = 13,
  kSubtokenOutOfRange = 14,
  kUnsupportedOperator = 15,
  kLayoutMismatch = 16,
  kNonFiniteLoss = 17,
  kVersionMismatch = 18,
  kCorruptCheckpoint = 19,
  kTooLarge = 20,
  kEmptyJoinGraph = 21,
  kConfigError = 22,
  kInvalidArgument = 23,
  kInternal = 24,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Result of a validation that reports instead of throwing.
struct Status {
  ErrorCode code = ErrorCode::kOk;
  std::string message;

  bool ok() const { return code == ErrorCode::kOk; }
  static Status Ok() { return {}; }
  static Status FromError(const Error& e) { return {e.code(), e.what()}; }
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace arcard
