// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/config/config.hpp"
#include "hems/service/session.hpp"

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace hems::service {

/// HTTP facade:
///   POST /sessions                  create, returns the first question
///   POST /sessions/{id}/answers     {"answer": "..."}
///   GET  /sessions/{id}             snapshot
///   GET  /sessions/{id}/schedule    chart series once done
///   GET  /sessions/{id}/events      server-sent events (?after=seq)
///   GET  /health
/// Errors are {"error": {"code": ..., "message": ...}}.
class Server {
public:
    Server(SessionManager& sessions, const config::ServiceConfig& config);
    ~Server();

    /// Binds and returns the port (an ephemeral one when config.port is 0).
    int bind();
    /// Blocks serving requests until stop().
    void listen();
    void stop();

private:
    void routes();

    SessionManager& sessions_;
    config::ServiceConfig config_;
    std::unique_ptr<httplib::Server> http_;
};

/// Session defaults taken from a run configuration.
SessionOptions session_options(const config::RunConfig& config);

} // namespace hems::service
