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

#include "yaml_fields.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "hrc_safety/errors.hpp"

namespace hrc::yaml_fields
{

void schema_error(const std::string & path, const std::string & what)
{
  throw Error(ErrorCode::SchemaError, path.empty() ? what : path + ": " + what);
}

void expect_keys(
  const YAML::Node & node, const std::string & path,
  std::initializer_list<std::string_view> required,
  std::initializer_list<std::string_view> optional_keys)
{
  if (!node.IsMap()) {
    schema_error(path, "expected a mapping");
  }
  std::set<std::string, std::less<>> seen;
  for (auto it = node.begin(); it != node.end(); ++it) {
    if (!it->first.IsScalar()) {
      schema_error(path, "non-scalar key");
    }
    const std::string & key = it->first.Scalar();
    bool known = false;
    for (auto k : required) {
      known = known || k == key;
    }
    for (auto k : optional_keys) {
      known = known || k == key;
    }
    if (!known) {
      schema_error(path, fmt::format("unexpected field '{}'", key));
    }
    if (!seen.insert(key).second) {
      schema_error(path, fmt::format("duplicate field '{}'", key));
    }
  }
  for (auto k : required) {
    if (seen.find(k) == seen.end()) {
      schema_error(path, fmt::format("missing field '{}'", k));
    }
  }
}

YAML::Node child(const YAML::Node & node, const std::string & path, const char * key)
{
  const YAML::Node c = node[key];
  if (!c.IsDefined()) {
    schema_error(path, fmt::format("missing field '{}'", key));
  }
  return c;
}

namespace
{

const std::string & scalar_text(const YAML::Node & node, const std::string & path)
{
  if (!node.IsScalar()) {
    schema_error(path, "expected a scalar");
  }
  return node.Scalar();
}

}  // namespace

double as_double(const YAML::Node & node, const std::string & path)
{
  const std::string & s = scalar_text(node, path);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    schema_error(path, fmt::format("'{}' is not a finite number", s));
  }
  return v;
}

std::int64_t as_int(const YAML::Node & node, const std::string & path)
{
  const std::string & s = scalar_text(node, path);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    schema_error(path, fmt::format("'{}' is not an integer", s));
  }
  return v;
}

bool as_bool(const YAML::Node & node, const std::string & path)
{
  const std::string & s = scalar_text(node, path);
  if (s == "true") {
    return true;
  }
  if (s == "false") {
    return false;
  }
  schema_error(path, fmt::format("'{}' is not a boolean", s));
}

std::string as_string(const YAML::Node & node, const std::string & path)
{
  return scalar_text(node, path);
}

std::vector<double> as_doubles(const YAML::Node & node, const std::string & path)
{
  if (!node.IsSequence()) {
    schema_error(path, "expected a sequence of numbers");
  }
  std::vector<double> out;
  out.reserve(node.size());
  size_t i = 0;
  for (const auto & item : node) {
    out.push_back(as_double(item, fmt::format("{}[{}]", path, i++)));
  }
  return out;
}

bool is_null(const YAML::Node & node)
{
  return node.IsNull();
}

namespace
{

template<typename F>
auto invariant(const std::string & path, F && f)
{
  try {
    return f();
  } catch (const Error & e) {
    if (e.code() == ErrorCode::InvalidArgument) {
      throw Error(ErrorCode::ValidationError, path + ": " + e.detail());
    }
    throw;
  }
}

}  // namespace

geometry::CameraIntrinsics camera(const YAML::Node & node, const std::string & path)
{
  expect_keys(node, path, {"fx", "fy", "cx", "cy", "width", "height"});
  geometry::CameraIntrinsics cam;
  cam.fx = as_double(node["fx"], path + ".fx");
  cam.fy = as_double(node["fy"], path + ".fy");
  cam.cx = as_double(node["cx"], path + ".cx");
  cam.cy = as_double(node["cy"], path + ".cy");
  cam.width = as_double(node["width"], path + ".width");
  cam.height = as_double(node["height"], path + ".height");
  invariant(path, [&] {cam.validate(); return 0;});
  return cam;
}

geometry::RigidTransform transform(const YAML::Node & node, const std::string & path)
{
  expect_keys(node, path, {"rotation_rowmajor", "translation_m"});
  const auto r = as_fixed<9>(node["rotation_rowmajor"], path + ".rotation_rowmajor");
  const auto t = as_fixed<3>(node["translation_m"], path + ".translation_m");
  return invariant(path, [&] {return geometry::RigidTransform::from_rowmajor(r, t);});
}

safety::SafetyZone zone(const YAML::Node & node, const std::string & path)
{
  expect_keys(node, path, {"min_m", "max_m"});
  const auto lo = as_fixed<3>(node["min_m"], path + ".min_m");
  const auto hi = as_fixed<3>(node["max_m"], path + ".max_m");
  return invariant(
    path, [&] {
      return safety::SafetyZone(
        {lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]});
    });
}

geometry::TablePlane table(const YAML::Node & node, const std::string & path)
{
  expect_keys(node, path, {"z0_m"});
  return {as_double(node["z0_m"], path + ".z0_m")};
}

safety::MonitorConfig monitor(const YAML::Node & node, const std::string & path)
{
  expect_keys(
    node, path,
    {"exit_debounce_frames", "missing_failsafe_frames", "confidence_min", "projection_mode"});
  safety::MonitorConfig cfg;
  const auto debounce = as_int(node["exit_debounce_frames"], path + ".exit_debounce_frames");
  const auto failsafe = as_int(node["missing_failsafe_frames"], path + ".missing_failsafe_frames");
  if (debounce < 1 || debounce > 1000000 || failsafe < 1 || failsafe > 1000000) {
    throw Error(ErrorCode::ValidationError, path + ": frame thresholds out of range");
  }
  cfg.exit_debounce_frames = static_cast<int>(debounce);
  cfg.missing_failsafe_frames = static_cast<int>(failsafe);
  cfg.confidence_min = as_double(node["confidence_min"], path + ".confidence_min");
  const std::string mode = as_string(node["projection_mode"], path + ".projection_mode");
  if (mode != "depth" && mode != "plane") {
    schema_error(path + ".projection_mode", fmt::format("unknown mode '{}'", mode));
  }
  cfg.projection_mode = safety::projection_mode_from_string(mode);
  invariant(path, [&] {cfg.validate(); return 0;});
  return cfg;
}

kinematics::KinematicChain chain(const YAML::Node & node, const std::string & path)
{
  expect_keys(node, path, {"base_name", "joints", "tool_offset"});
  kinematics::KinematicChain out;
  out.base_name = as_string(node["base_name"], path + ".base_name");
  const YAML::Node joints = node["joints"];
  if (!joints.IsSequence()) {
    schema_error(path + ".joints", "expected a sequence");
  }
  size_t i = 0;
  for (const auto & jn : joints) {
    const std::string jp = fmt::format("{}.joints[{}]", path, i++);
    expect_keys(jn, jp, {"name", "axis", "origin", "limits_rad"});
    kinematics::JointSpec j;
    j.name = as_string(jn["name"], jp + ".name");
    const auto axis = as_fixed<3>(jn["axis"], jp + ".axis");
    j.axis = Eigen::Vector3d(axis[0], axis[1], axis[2]);
    j.origin = transform(jn["origin"], jp + ".origin");
    const auto lim = as_fixed<2>(jn["limits_rad"], jp + ".limits_rad");
    j.min_rad = lim[0];
    j.max_rad = lim[1];
    out.joints.push_back(std::move(j));
  }
  out.tool_offset = transform(node["tool_offset"], path + ".tool_offset");
  invariant(path, [&] {out.validate(); return 0;});
  return out;
}

std::string num(double v)
{
  // 17 significant digits round-trip every double. YAML 1.1 readers only
  // take exponent forms with a mantissa dot, so 1e+20 is written 1.0e+20.
  std::string s = fmt::format("{:.17g}", v);
  const auto e = s.find('e');
  if (e != std::string::npos && s.find('.') == std::string::npos) {
    s.insert(e, ".0");
  }
  return s;
}

std::string num_list(const double * v, size_t n)
{
  std::string out = "[";
  for (size_t i = 0; i < n; ++i) {
    if (i) {
      out += ", ";
    }
    out += num(v[i]);
  }
  out += "]";
  return out;
}

std::string quoted(std::string_view s)
{
  std::string out = "\"";
  for (char c : s) {
    const auto uc = static_cast<unsigned char>(c);
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (uc < 0x20 || uc == 0x7f) {
      out += fmt::format("\\x{:02x}", uc);
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

std::string transform_flow(const geometry::RigidTransform & t)
{
  const auto r = t.rotation_rowmajor();
  const Eigen::Vector3d & p = t.translation();
  return fmt::format(
    "{{rotation_rowmajor: {}, translation_m: {}}}", num_list(r.data(), r.size()),
    num_list(p.data(), 3));
}

}  // namespace hrc::yaml_fields
