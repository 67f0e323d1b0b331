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

// Strict field decoding on top of yaml-cpp, shared by the session reader and
// the scene config loader. Every failure is an hrc::Error(SchemaError) that
// names the offending path.

#ifndef HRC_SAFETY__SRC__YAML_FIELDS_HPP_
#define HRC_SAFETY__SRC__YAML_FIELDS_HPP_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "hrc_safety/geometry.hpp"
#include "hrc_safety/kinematics.hpp"
#include "hrc_safety/safety_monitor.hpp"

namespace hrc::yaml_fields
{

[[noreturn]] void schema_error(const std::string & path, const std::string & what);

/// Requires a map whose keys are exactly `required` plus any of `optional_keys`.
void expect_keys(
  const YAML::Node & node, const std::string & path,
  std::initializer_list<std::string_view> required,
  std::initializer_list<std::string_view> optional_keys = {});

YAML::Node child(const YAML::Node & node, const std::string & path, const char * key);

double as_double(const YAML::Node & node, const std::string & path);
std::int64_t as_int(const YAML::Node & node, const std::string & path);
bool as_bool(const YAML::Node & node, const std::string & path);
std::string as_string(const YAML::Node & node, const std::string & path);
std::vector<double> as_doubles(const YAML::Node & node, const std::string & path);

template<size_t N>
std::array<double, N> as_fixed(const YAML::Node & node, const std::string & path)
{
  const auto v = as_doubles(node, path);
  if (v.size() != N) {
    schema_error(path, "expected " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (size_t i = 0; i < N; ++i) {
    out[i] = v[i];
  }
  return out;
}

bool is_null(const YAML::Node & node);

// Domain blocks. Constructor invariant failures surface as InvalidArgument.
geometry::CameraIntrinsics camera(const YAML::Node & node, const std::string & path);
geometry::RigidTransform transform(const YAML::Node & node, const std::string & path);
safety::SafetyZone zone(const YAML::Node & node, const std::string & path);
geometry::TablePlane table(const YAML::Node & node, const std::string & path);
safety::MonitorConfig monitor(const YAML::Node & node, const std::string & path);
kinematics::KinematicChain chain(const YAML::Node & node, const std::string & path);

// Emission helpers. Doubles use 17 significant digits.
std::string num(double v);
std::string num_list(const double * v, size_t n);
std::string quoted(std::string_view s);
std::string transform_flow(const geometry::RigidTransform & t);

}  // namespace hrc::yaml_fields

#endif  // HRC_SAFETY__SRC__YAML_FIELDS_HPP_
