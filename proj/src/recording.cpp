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

#include "hrc_safety/recording.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "hrc_safety/errors.hpp"
#include "yaml_fields.hpp"

namespace hrc::recording
{

namespace yf = yaml_fields;

namespace
{

// sample_count is written into a fixed-width slot so finalize can patch it in place.
constexpr int kCountWidth = 20;
constexpr const char * kCountKey = "  sample_count: ";

std::string count_slot(const std::optional<std::uint64_t> & count)
{
  return fmt::format("{:<{}}", count ? std::to_string(*count) : std::string("null"), kCountWidth);
}

std::string chain_block(const SessionMeta & meta)
{
  if (meta.chain_name) {
    return fmt::format("  chain: {}\n", yf::quoted(*meta.chain_name));
  }
  const auto & c = meta.chain;
  std::string out = "  chain:\n";
  out += fmt::format("    base_name: {}\n", yf::quoted(c.base_name));
  out += "    joints:\n";
  for (const auto & j : c.joints) {
    const double lim[2] = {j.min_rad, j.max_rad};
    out += fmt::format(
      "      - {{name: {}, axis: {}, origin: {}, limits_rad: {}}}\n", yf::quoted(j.name),
      yf::num_list(j.axis.data(), 3), yf::transform_flow(j.origin), yf::num_list(lim, 2));
  }
  out += fmt::format("    tool_offset: {}\n", yf::transform_flow(c.tool_offset));
  return out;
}

// Header up to and including the sample_count key; the slot and remainder follow.
std::pair<std::string, std::string> header_parts(const SessionMeta & meta)
{
  std::string head = "meta:\n";
  head += fmt::format("  version: {}\n", meta.version);
  head += fmt::format("  rate_hz: {}\n", yf::num(meta.rate_hz));
  head += fmt::format("  created_unix: {}\n", meta.created_unix);
  head += kCountKey;

  const auto & cam = meta.camera;
  const auto & z = meta.zone;
  const auto & m = meta.monitor;
  std::string tail = "\n";
  tail += fmt::format(
    "  camera: {{fx: {}, fy: {}, cx: {}, cy: {}, width: {}, height: {}}}\n", yf::num(cam.fx),
    yf::num(cam.fy), yf::num(cam.cx), yf::num(cam.cy), yf::num(cam.width), yf::num(cam.height));
  tail += fmt::format("  extrinsic: {}\n", yf::transform_flow(meta.extrinsic));
  tail += fmt::format(
    "  zone: {{min_m: {}, max_m: {}}}\n", yf::num_list(z.min_corner().data(), 3),
    yf::num_list(z.max_corner().data(), 3));
  tail += fmt::format("  table: {{z0_m: {}}}\n", yf::num(meta.table.z0));
  tail += fmt::format(
    "  monitor: {{exit_debounce_frames: {}, missing_failsafe_frames: {}, confidence_min: {}, "
    "projection_mode: {}}}\n",
    m.exit_debounce_frames, m.missing_failsafe_frames, yf::num(m.confidence_min),
    safety::to_string(m.projection_mode));
  tail += chain_block(meta);
  tail += "samples:\n";
  return {head, tail};
}

std::string sample_line(const FrameSample & s)
{
  std::string px = "null";
  if (s.wrist_px) {
    px = fmt::format("[{}, {}]", yf::num(s.wrist_px->u), yf::num(s.wrist_px->v));
  }
  return fmt::format(
    "  - {{t: {}, joints_rad: {}, wrist_px: {}, wrist_depth_m: {}, wrist_conf: {}, "
    "safety_flag: {}}}\n",
    yf::num(s.t), yf::num_list(s.joints_rad.data(), s.joints_rad.size()), px,
    s.wrist_depth_m ? yf::num(*s.wrist_depth_m) : std::string("null"), yf::num(s.wrist_conf),
    s.safety_flag ? "true" : "false");
}

void check_sample(const FrameSample & s, size_t dof)
{
  auto bad = [](const std::string & what) {throw Error(ErrorCode::InvalidArgument, what);};
  if (!std::isfinite(s.t) || s.t < 0.0) {
    bad(fmt::format("sample time {} must be finite and >= 0", s.t));
  }
  if (s.joints_rad.size() != dof) {
    throw Error(
            ErrorCode::LengthMismatch,
            fmt::format("sample has {} joints, chain has {}", s.joints_rad.size(), dof));
  }
  for (double q : s.joints_rad) {
    if (!std::isfinite(q)) {
      bad("non-finite joint angle");
    }
  }
  if (!s.wrist_px && s.wrist_depth_m) {
    bad("wrist depth present without a pixel");
  }
  if (s.wrist_px && !(std::isfinite(s.wrist_px->u) && std::isfinite(s.wrist_px->v))) {
    bad("non-finite wrist pixel");
  }
  if (s.wrist_depth_m && !(std::isfinite(*s.wrist_depth_m) && *s.wrist_depth_m > 0.0)) {
    bad("wrist depth must be finite and positive");
  }
  if (!(s.wrist_conf >= 0.0 && s.wrist_conf <= 1.0)) {
    bad(fmt::format("wrist confidence {} outside [0, 1]", s.wrist_conf));
  }
}

}  // namespace

kinematics::KinematicChain named_chain(std::string_view name)
{
  if (name == kinematics::kReferenceChainName) {
    return kinematics::reference_chain();
  }
  throw Error(ErrorCode::SchemaError, fmt::format("unknown chain name '{}'", name));
}

std::string session_filename(std::int64_t created_unix)
{
  return fmt::format("session-{}.yaml", created_unix);
}

std::string serialize(const SessionRecording & rec)
{
  auto [head, tail] = header_parts(rec.meta);
  std::string out = head + count_slot(rec.samples.size()) + tail;
  for (const auto & s : rec.samples) {
    out += sample_line(s);
  }
  return out;
}

SessionWriter::SessionWriter(const std::filesystem::path & path, const SessionMeta & meta)
: path_(path), dof_(meta.chain.dof())
{
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) {
    throw Error(ErrorCode::IoFailure, fmt::format("cannot create '{}'", path.string()));
  }
  auto [head, tail] = header_parts(meta);
  count_offset_ = static_cast<std::streamoff>(head.size());
  out_ << head << count_slot(std::nullopt) << tail;
  out_.flush();
  if (!out_) {
    throw Error(ErrorCode::IoFailure, fmt::format("write to '{}' failed", path.string()));
  }
}

SessionWriter::~SessionWriter()
{
  if (out_.is_open()) {
    out_.flush();
  }
}

void SessionWriter::append(const FrameSample & sample)
{
  if (finalized_) {
    throw Error(ErrorCode::IoFailure, "append after finalize");
  }
  if (last_t_ && !(sample.t > *last_t_)) {
    throw Error(
            ErrorCode::NonMonotonicTimestamp,
            fmt::format("sample at t={} does not follow t={}", sample.t, *last_t_));
  }
  check_sample(sample, dof_);
  if (!last_t_ && sample.t != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "first sample must be at t=0");
  }
  out_ << sample_line(sample);
  out_.flush();
  if (!out_) {
    throw Error(ErrorCode::IoFailure, fmt::format("write to '{}' failed", path_.string()));
  }
  last_t_ = sample.t;
  ++count_;
}

void SessionWriter::finalize()
{
  if (finalized_) {
    return;
  }
  out_.seekp(count_offset_);
  out_ << count_slot(count_);
  out_.flush();
  out_.close();
  if (out_.fail()) {
    throw Error(ErrorCode::IoFailure, fmt::format("finalizing '{}' failed", path_.string()));
  }
  finalized_ = true;
}

void write_session(const std::filesystem::path & path, const SessionRecording & rec)
{
  SessionWriter w(path, rec.meta);
  for (const auto & s : rec.samples) {
    w.append(s);
  }
  w.finalize();
}

namespace
{

FrameSample parse_sample(const YAML::Node & node, const std::string & path)
{
  yf::expect_keys(
    node, path, {"t", "joints_rad", "wrist_px", "wrist_depth_m", "wrist_conf", "safety_flag"});
  FrameSample s;
  s.t = yf::as_double(node["t"], path + ".t");
  s.joints_rad = yf::as_doubles(node["joints_rad"], path + ".joints_rad");
  const YAML::Node px = node["wrist_px"];
  if (!yf::is_null(px)) {
    const auto uv = yf::as_fixed<2>(px, path + ".wrist_px");
    s.wrist_px = geometry::PixelPoint{uv[0], uv[1]};
  }
  const YAML::Node depth = node["wrist_depth_m"];
  if (!yf::is_null(depth)) {
    s.wrist_depth_m = yf::as_double(depth, path + ".wrist_depth_m");
  }
  s.wrist_conf = yf::as_double(node["wrist_conf"], path + ".wrist_conf");
  s.safety_flag = yf::as_bool(node["safety_flag"], path + ".safety_flag");
  return s;
}

SessionMeta parse_meta(const YAML::Node & node)
{
  const std::string path = "meta";
  if (!node.IsMap()) {
    yf::schema_error(path, "expected a mapping");
  }
  const auto version = yf::as_int(yf::child(node, path, "version"), "meta.version");
  if (version != kFormatVersion) {
    yf::schema_error("meta.version", fmt::format("unsupported version {}", version));
  }
  yf::expect_keys(
    node, path,
    {"version", "rate_hz", "created_unix", "sample_count", "camera", "extrinsic", "zone",
      "table", "monitor", "chain"});

  SessionMeta meta;
  meta.version = static_cast<int>(version);
  meta.rate_hz = yf::as_double(node["rate_hz"], "meta.rate_hz");
  meta.created_unix = yf::as_int(node["created_unix"], "meta.created_unix");
  const YAML::Node count = node["sample_count"];
  if (!yf::is_null(count)) {
    const auto n = yf::as_int(count, "meta.sample_count");
    if (n < 0) {
      yf::schema_error("meta.sample_count", "negative sample count");
    }
    meta.sample_count = static_cast<std::uint64_t>(n);
  }
  meta.camera = yf::camera(node["camera"], "meta.camera");
  meta.extrinsic = yf::transform(node["extrinsic"], "meta.extrinsic");
  meta.zone = yf::zone(node["zone"], "meta.zone");
  meta.table = yf::table(node["table"], "meta.table");
  meta.monitor = yf::monitor(node["monitor"], "meta.monitor");
  const YAML::Node chain = node["chain"];
  if (chain.IsScalar()) {
    meta.chain_name = chain.Scalar();
    meta.chain = named_chain(*meta.chain_name);
  } else {
    meta.chain = yf::chain(chain, "meta.chain");
  }
  return meta;
}

}  // namespace

SessionRecording parse_session_unvalidated(std::string_view text)
{
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const std::exception & e) {
    throw Error(ErrorCode::ParseError, e.what());
  }

  SessionRecording rec;
  try {
    yf::expect_keys(root, "", {"meta", "samples"});
    rec.meta = parse_meta(root["meta"]);
    const YAML::Node samples = root["samples"];
    if (!yf::is_null(samples)) {
      if (!samples.IsSequence()) {
        yf::schema_error("samples", "expected a sequence");
      }
      rec.samples.reserve(samples.size());
      size_t i = 0;
      for (const auto & node : samples) {
        rec.samples.push_back(parse_sample(node, fmt::format("samples[{}]", i++)));
      }
    }
  } catch (const YAML::Exception & e) {
    throw Error(ErrorCode::SchemaError, e.what());
  } catch (const Error &) {
    throw;
  } catch (const std::exception & e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return rec;
}

SessionRecording parse_session(std::string_view text)
{
  SessionRecording rec = parse_session_unvalidated(text);
  const ValidationReport report = validate(rec);
  if (!report.ok()) {
    throw Error(ErrorCode::ValidationError, format_issue(report.errors.front()));
  }
  return rec;
}

std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path.string()));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::IoFailure, fmt::format("cannot read '{}'", path.string()));
  }
  return buf.str();
}

SessionRecording load(const std::filesystem::path & path)
{
  return parse_session(read_file(path));
}

ValidationReport validate(const SessionRecording & rec)
{
  ValidationReport report;
  auto error = [&](std::optional<size_t> i, std::optional<double> t, std::string msg) {
      report.errors.push_back({i, t, std::move(msg)});
    };
  auto warn = [&](std::optional<size_t> i, std::optional<double> t, std::string msg) {
      report.warnings.push_back({i, t, std::move(msg)});
    };
  auto guarded = [&](const char * what, auto && f) {
      try {
        f();
      } catch (const Error & e) {
        error(std::nullopt, std::nullopt, fmt::format("{}: {}", what, e.detail()));
      }
    };

  const SessionMeta & meta = rec.meta;
  if (meta.version != kFormatVersion) {
    error(std::nullopt, std::nullopt, fmt::format("unsupported version {}", meta.version));
  }
  const bool rate_ok = std::isfinite(meta.rate_hz) && meta.rate_hz > 0.0;
  if (!rate_ok) {
    error(std::nullopt, std::nullopt, fmt::format("rate_hz {} must be positive", meta.rate_hz));
  }
  guarded("camera", [&] {meta.camera.validate();});
  guarded("monitor", [&] {meta.monitor.validate();});
  guarded("chain", [&] {meta.chain.validate();});

  if (meta.sample_count) {
    if (*meta.sample_count != rec.samples.size()) {
      error(
        std::nullopt, std::nullopt,
        fmt::format(
          "sample_count {} does not match {} samples", *meta.sample_count, rec.samples.size()));
    }
  } else {
    warn(std::nullopt, std::nullopt, "session was not finalized (sample_count is null)");
  }

  const double period = rate_ok ? 1.0 / meta.rate_hz : 0.0;
  const size_t dof = meta.chain.dof();
  for (size_t i = 0; i < rec.samples.size(); ++i) {
    const FrameSample & s = rec.samples[i];
    if (!std::isfinite(s.t) || s.t < 0.0) {
      error(i, s.t, "timestamp must be finite and >= 0");
    } else if (i == 0 && s.t != 0.0) {
      error(i, s.t, "first sample must be at t=0");
    }
    if (i > 0) {
      const double prev = rec.samples[i - 1].t;
      if (!(s.t > prev)) {
        error(i, s.t, fmt::format("timestamp does not increase (previous t={})", prev));
      } else if (rate_ok && std::abs((s.t - prev) - period) > 0.5 * period) {
        warn(i, s.t, fmt::format("rate jitter: gap {:.6g} s, nominal {:.6g} s", s.t - prev, period));
      }
    }
    try {
      check_sample(s, dof);
    } catch (const Error & e) {
      error(i, s.t, e.detail());
      continue;
    }
    for (const auto & v : kinematics::limit_violations(meta.chain, s.joints_rad)) {
      warn(
        i, s.t,
        fmt::format(
          "joint '{}' at {:.6g} rad outside limits", meta.chain.joints[v.joint].name, v.value));
    }
  }
  return report;
}

std::string format_issue(const Issue & issue)
{
  std::string out;
  if (issue.sample_index) {
    out += fmt::format("sample {}", *issue.sample_index);
    if (issue.t) {
      out += fmt::format(" (t={})", *issue.t);
    }
    out += ": ";
  }
  return out + issue.message;
}

}  // namespace hrc::recording
