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

#ifndef HRC_SAFETY__HTTP_SERVER_HPP_
#define HRC_SAFETY__HTTP_SERVER_HPP_

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "hrc_safety/control_plane.hpp"
#include "hrc_safety/errors.hpp"

namespace httplib
{
class Server;
}

namespace hrc::service
{

/// HTTP status used for an error code.
int http_status(ErrorCode code);

nlohmann::json to_json(const ApiResult & r);
nlohmann::json to_json(const SessionInfo & s);
nlohmann::json error_json(const Error & e);

/**
 * JSON API in front of a ControlPlane.
 *
 *   POST /api/run/start | /api/run/stop
 *   POST /api/fsm/start | /api/fsm/stop
 *   POST /api/camera/start | /api/pose/start | /api/monitor/start
 *   POST /api/record          {"on": bool}
 *   POST /api/replay/open     {"path": string?}
 *   POST /api/replay/control  {"action": "play"|"pause"|"seek"|"speed", "value": number?}
 *   POST /api/replay/close
 *   GET  /api/state | /api/sessions
 *   GET  /api/telemetry       chunked NDJSON; the first line is the current state
 *
 * A driver thread feeds wall time to ControlPlane::advance().
 */
class HttpServer
{
public:
  struct Options
  {
    std::string host{"0.0.0.0"};
    /// 0 binds an ephemeral port.
    int port{8080};
    std::optional<std::filesystem::path> static_dir;
    /// Driver rate; 0 disables the driver (tests advance time themselves).
    double drive_hz{20.0};
    size_t telemetry_capacity{256};
  };

  HttpServer(std::shared_ptr<ControlPlane> plane, Options options);
  ~HttpServer();

  HttpServer(const HttpServer &) = delete;
  HttpServer & operator=(const HttpServer &) = delete;

  /// Binds the socket and starts serving on background threads. Returns the port.
  int start();
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  int port() const {return port_;}
  ControlPlane & plane() {return *plane_;}

private:
  void routes();
  void drive();

  std::shared_ptr<ControlPlane> plane_;
  Options opts_;
  std::unique_ptr<httplib::Server> server_;
  std::atomic<bool> stopping_{false};
  int port_{0};
  std::thread listen_thread_;
  std::thread driver_thread_;
};

}  // namespace hrc::service

#endif  // HRC_SAFETY__HTTP_SERVER_HPP_
