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

#ifndef HRC_SAFETY__TESTS__SUPPORT_HPP_
#define HRC_SAFETY__TESTS__SUPPORT_HPP_

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "hrc_safety/errors.hpp"

namespace test
{

class TempDir
{
public:
  TempDir()
  {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
      ("hrc_safety_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;

  const std::filesystem::path & path() const {return path_;}
  std::filesystem::path operator/(const std::string & name) const {return path_ / name;}

private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path & p, const std::string & text)
{
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::filesystem::path golden_path()
{
  return std::filesystem::path(HRC_TEST_DATA_DIR) / "golden_session.yaml";
}

/// Runs a shell command; returns exit status and captured stdout.
inline std::pair<int, std::string> run(const std::string & cmd)
{
  std::string out;
  FILE * pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    return {-1, out};
  }
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    out.append(buf, n);
  }
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

template<typename F>
void expect_error(hrc::ErrorCode code, F && f)
{
  try {
    f();
    ADD_FAILURE() << "expected " << hrc::error_name(code);
  } catch (const hrc::Error & e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace test

#endif  // HRC_SAFETY__TESTS__SUPPORT_HPP_
