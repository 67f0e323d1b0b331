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

#ifndef HRC_SAFETY__RECORDING_HPP_
#define HRC_SAFETY__RECORDING_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hrc_safety/frame_sample.hpp"
#include "hrc_safety/geometry.hpp"
#include "hrc_safety/kinematics.hpp"
#include "hrc_safety/safety_monitor.hpp"

namespace hrc::recording
{

inline constexpr int kFormatVersion = 1;

struct SessionMeta
{
  int version{kFormatVersion};
  double rate_hz{20.0};
  std::int64_t created_unix{0};
  /// Written by finalize; absent in files whose writer never finished.
  std::optional<std::uint64_t> sample_count;
  geometry::CameraIntrinsics camera;
  geometry::RigidTransform extrinsic;
  safety::SafetyZone zone;
  geometry::TablePlane table;
  safety::MonitorConfig monitor;
  kinematics::KinematicChain chain;
  /// When set the file stores this name instead of the inline chain.
  std::optional<std::string> chain_name;

  safety::HandProjector projector() const
  {
    return {camera, extrinsic, table, monitor.projection_mode};
  }

  bool operator==(const SessionMeta &) const = default;
};

struct SessionRecording
{
  SessionMeta meta;
  std::vector<FrameSample> samples;

  double duration() const {return samples.empty() ? 0.0 : samples.back().t;}

  bool operator==(const SessionRecording &) const = default;
};

/// Resolves a named chain reference. Throws SchemaError for unknown names.
kinematics::KinematicChain named_chain(std::string_view name);

/// `session-<created_unix>.yaml`
std::string session_filename(std::int64_t created_unix);

/// Exact on-disk text for a complete recording.
std::string serialize(const SessionRecording & rec);

/// Streaming session writer. Each append is flushed before returning, and the
/// sample count is patched into the header on finalize.
class SessionWriter
{
public:
  /// Throws IoFailure if the file cannot be created.
  SessionWriter(const std::filesystem::path & path, const SessionMeta & meta);
  ~SessionWriter();

  SessionWriter(const SessionWriter &) = delete;
  SessionWriter & operator=(const SessionWriter &) = delete;

  /// Throws NonMonotonicTimestamp, InvalidArgument (malformed sample) or IoFailure.
  void append(const FrameSample & sample);
  /// Idempotent. Throws IoFailure.
  void finalize();

  const std::filesystem::path & path() const {return path_;}
  std::uint64_t count() const {return count_;}
  bool finalized() const {return finalized_;}

private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::streamoff count_offset_{0};
  size_t dof_{0};
  std::uint64_t count_{0};
  std::optional<double> last_t_;
  bool finalized_{false};
};

/// Whole-file write through SessionWriter.
void write_session(const std::filesystem::path & path, const SessionRecording & rec);

/// Parses and fully validates session text.
/// Throws ParseError (not YAML), SchemaError (wrong shape or version) or
/// ValidationError (first error of validate()).
SessionRecording parse_session(std::string_view text);

/// Schema checks only; pair with validate() to see every issue.
SessionRecording parse_session_unvalidated(std::string_view text);

/// Throws IoFailure.
std::string read_file(const std::filesystem::path & path);

/// Throws IoFailure if the file cannot be read, otherwise as parse_session.
SessionRecording load(const std::filesystem::path & path);

struct Issue
{
  std::optional<size_t> sample_index;
  std::optional<double> t;
  std::string message;
};

struct ValidationReport
{
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const {return errors.empty();}
  bool empty() const {return errors.empty() && warnings.empty();}
};

/// Invariant breaches are errors; rate jitter (gap deviating more than 50%
/// from 1/rate_hz), joint-limit violations and unfinalized files are warnings.
ValidationReport validate(const SessionRecording & rec);

std::string format_issue(const Issue & issue);

}  // namespace hrc::recording

#endif  // HRC_SAFETY__RECORDING_HPP_
