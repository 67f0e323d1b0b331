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

#include "hrc_safety/http_server.hpp"

#include <chrono>
#include <functional>
#include <utility>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

namespace hrc::service
{

using nlohmann::json;

namespace
{

constexpr auto kTelemetryPoll = std::chrono::milliseconds(100);

json body_json(const httplib::Request & req)
{
  if (req.body.empty()) {
    return json::object();
  }
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::InvalidArgument, "request body is not valid JSON");
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  return j;
}

void reply(httplib::Response & res, int status, const json & j)
{
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

using Handler = std::function<json(const httplib::Request &)>;

// Runs a handler and maps typed errors onto HTTP statuses. Anything that is
// not an hrc::Error is a server bug and reported as 500.
httplib::Server::Handler guarded(Handler h)
{
  return [h = std::move(h)](const httplib::Request & req, httplib::Response & res) {
           try {
             reply(res, 200, h(req));
           } catch (const Error & e) {
             reply(res, http_status(e.code()), error_json(e));
           } catch (const json::exception & e) {
             reply(
               res, 400, error_json(Error(ErrorCode::InvalidArgument, e.what())));
           } catch (const std::exception & e) {
             spdlog::error("unhandled error in {} {}: {}", req.method, req.path, e.what());
             reply(res, 500, {{"ok", false}, {"error", {{"code", "Internal"}, {"message", e.what()}}}});
           }
         };
}

}  // namespace

int http_status(ErrorCode code)
{
  switch (code) {
    case ErrorCode::InvalidTransition:
    case ErrorCode::DependencyNotRunning:
      return 409;
    case ErrorCode::InvalidArgument:
      return 400;
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::ValidationError:
      return 422;
    case ErrorCode::NotFound:
      return 404;
    default:
      return 500;
  }
}

json to_json(const ApiResult & r)
{
  json j = {{"ok", true}, {"changed", r.changed}, {"state", telemetry::to_json(r.state)}};
  if (r.path) {
    j["path"] = *r.path;
  }
  if (r.frame) {
    j["frame"] = telemetry::to_json(*r.frame, true);
  }
  return j;
}

json to_json(const SessionInfo & s)
{
  json periods = json::array();
  for (const auto & p : s.periods) {
    periods.push_back({{"t_enter", p.t_enter}, {"t_exit", p.t_exit}});
  }
  return {
    {"path", s.path},
    {"created_unix", s.created_unix},
    {"duration", s.duration},
    {"sample_count", s.sample_count},
    {"period_count", s.period_count},
    {"periods", std::move(periods)},
    {"error", s.error ? json(*s.error) : json(nullptr)},
  };
}

json error_json(const Error & e)
{
  return {{"ok", false}, {"error", {{"code", error_name(e.code())}, {"message", e.detail()}}}};
}

HttpServer::HttpServer(std::shared_ptr<ControlPlane> plane, Options options)
: plane_(std::move(plane)), opts_(std::move(options)), server_(std::make_unique<httplib::Server>())
{
  routes();
}

HttpServer::~HttpServer()
{
  stop();
}

void HttpServer::routes()
{
  auto & s = *server_;
  auto post = [&s](const std::string & path, Handler h) {s.Post(path, guarded(std::move(h)));};
  ControlPlane * p = plane_.get();

  post("/api/run/start", [p](const auto &) {return to_json(p->start_running());});
  post("/api/run/stop", [p](const auto &) {return to_json(p->stop_running());});
  post("/api/fsm/start", [p](const auto &) {return to_json(p->start_fsm());});
  post("/api/fsm/stop", [p](const auto &) {return to_json(p->stop_fsm());});
  post("/api/camera/start", [p](const auto &) {return to_json(p->start_camera());});
  post("/api/pose/start", [p](const auto &) {return to_json(p->start_pose_estimate());});
  post("/api/monitor/start", [p](const auto &) {return to_json(p->start_safety_monitoring());});
  post(
    "/api/record", [p](const httplib::Request & req) {
      const json body = body_json(req);
      if (!body.contains("on") || !body["on"].is_boolean()) {
        throw Error(ErrorCode::InvalidArgument, "body must contain boolean 'on'");
      }
      return to_json(p->set_recording(body["on"].get<bool>()));
    });
  post(
    "/api/replay/open", [p](const httplib::Request & req) {
      const json body = body_json(req);
      std::optional<std::filesystem::path> path;
      if (body.contains("path") && !body["path"].is_null()) {
        if (!body["path"].is_string()) {
          throw Error(ErrorCode::InvalidArgument, "'path' must be a string");
        }
        path = body["path"].get<std::string>();
      }
      return to_json(p->replay_open(path));
    });
  post(
    "/api/replay/control", [p](const httplib::Request & req) {
      const json body = body_json(req);
      if (!body.contains("action") || !body["action"].is_string()) {
        throw Error(ErrorCode::InvalidArgument, "body must contain string 'action'");
      }
      std::optional<double> value;
      if (body.contains("value") && !body["value"].is_null()) {
        if (!body["value"].is_number()) {
          throw Error(ErrorCode::InvalidArgument, "'value' must be a number");
        }
        value = body["value"].get<double>();
      }
      return to_json(
        p->replay_control(replay_action_from_string(body["action"].get<std::string>()), value));
    });
  post("/api/replay/close", [p](const auto &) {return to_json(p->replay_close());});

  s.Get(
    "/api/state", guarded(
      [p](const auto &) {
        return json{{"ok", true}, {"state", telemetry::to_json(p->get_state())}};
      }));
  s.Get(
    "/api/sessions", guarded(
      [p](const auto &) {
        json list = json::array();
        for (const auto & info : p->list_sessions()) {
          list.push_back(to_json(info));
        }
        return json{{"ok", true}, {"sessions", std::move(list)}};
      }));

  s.Get(
    "/api/telemetry", [this](const httplib::Request &, httplib::Response & res) {
      auto sub = plane_->telemetry()->subscribe(opts_.telemetry_capacity);
      auto first = std::make_shared<std::string>(
        json{{"type", "state"}, {"seq", plane_->telemetry()->published()},
          {"state", telemetry::to_json(plane_->get_state())}}.dump() + "\n");
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
        "application/x-ndjson",
        [this, sub, first](size_t, httplib::DataSink & sink) {
          if (!first->empty()) {
            const std::string line = std::move(*first);
            first->clear();
            return sink.write(line.data(), line.size());
          }
          if (stopping_ || sub->closed()) {
            sink.done();
            return true;
          }
          if (!sink.is_writable()) {
            return false;
          }
          auto e = sub->pop(kTelemetryPoll);
          if (!e) {
            return true;
          }
          const std::string line = telemetry::to_json(*e).dump() + "\n";
          return sink.write(line.data(), line.size());
        },
        [sub](bool) {sub->close();});
    });

  if (opts_.static_dir) {
    if (!s.set_mount_point("/", opts_.static_dir->string())) {
      throw Error(
              ErrorCode::NotFound,
              fmt::format("static directory '{}' does not exist", opts_.static_dir->string()));
    }
  }
}

int HttpServer::start()
{
  if (listen_thread_.joinable()) {
    return port_;
  }
  if (opts_.port == 0) {
    port_ = server_->bind_to_any_port(opts_.host);
  } else {
    port_ = server_->bind_to_port(opts_.host, opts_.port) ? opts_.port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::IoFailure, fmt::format("cannot bind {}:{}", opts_.host, opts_.port));
  }
  stopping_ = false;
  listen_thread_ = std::thread([this] {server_->listen_after_bind();});
  if (opts_.drive_hz > 0.0) {
    driver_thread_ = std::thread([this] {drive();});
  }
  spdlog::info("serving on {}:{}", opts_.host, port_);
  return port_;
}

void HttpServer::drive()
{
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
    std::chrono::duration<double>(1.0 / opts_.drive_hz));
  auto last = clock::now();
  auto next = last + period;
  while (!stopping_) {
    std::this_thread::sleep_until(next);
    const auto now = clock::now();
    try {
      plane_->advance(std::chrono::duration<double>(now - last).count());
    } catch (const std::exception & e) {
      spdlog::error("advance failed: {}", e.what());
    }
    last = now;
    next += period;
    if (next < now) {
      next = now + period;
    }
  }
}

void HttpServer::stop()
{
  stopping_ = true;
  if (driver_thread_.joinable()) {
    driver_thread_.join();
  }
  if (server_) {
    server_->stop();
  }
  if (listen_thread_.joinable()) {
    listen_thread_.join();
  }
}

void HttpServer::wait()
{
  while (!stopping_) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

}  // namespace hrc::service
