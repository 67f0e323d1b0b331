// Copyright 2026 The hrc_safety Authors.
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

#ifndef HRC_SAFETY__ERRORS_HPP_
#define HRC_SAFETY__ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hrc
{

/// Every failure raised by the library carries one of these codes, so callers
/// (and the HTTP layer) can dispatch on the kind of error instead of parsing text.
enum class ErrorCode
{
  InvalidArgument,
  NonPositiveDepth,
  RayParallelToPlane,
  IntersectionBehindCamera,
  PointBehindCamera,
  LengthMismatch,
  NonMonotonicTimestamp,
  InsufficientHistory,
  IoFailure,
  ParseError,
  SchemaError,
  ValidationError,
  IndexOutOfRange,
  NonSequentialReplay,
  InvalidTransition,
  DependencyNotRunning,
  NotFound,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string & detail)
  : std::runtime_error(std::string(error_name(code)) + ": " + detail),
    code_(code),
    detail_(detail)
  {}

  ErrorCode code() const noexcept {return code_;}
  const std::string & detail() const noexcept {return detail_;}

private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace hrc

#endif  // HRC_SAFETY__ERRORS_HPP_
