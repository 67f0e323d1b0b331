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

#include "hrc_safety/errors.hpp"

namespace hrc
{

std::string_view error_name(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::RayParallelToPlane: return "RayParallelToPlane";
    case ErrorCode::IntersectionBehindCamera: return "IntersectionBehindCamera";
    case ErrorCode::PointBehindCamera: return "PointBehindCamera";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonSequentialReplay: return "NonSequentialReplay";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::DependencyNotRunning: return "DependencyNotRunning";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace hrc
