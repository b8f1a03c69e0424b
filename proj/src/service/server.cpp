// SPDX-License-Identifier: Apache-2.0
#include "hems/service/server.hpp"

#include "hems/error.hpp"

#include <httplib.h>

namespace hems::service {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message)
{
    send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

// Runs a handler and maps exceptions onto status codes and error bodies.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn)
{
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const NotFound& e) {
            send_error(res, 404, "not_found", e.what());
        } catch (const StateError& e) {
            send_error(res, 409, "wrong_state", e.what());
        } catch (const ProviderError& e) {
            send_error(res, 502, "provider_error", e.what());
        } catch (const InvalidArgument& e) {
            send_error(res, 400, "invalid_argument", e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, 400, "invalid_argument", std::string("malformed JSON body: ") + e.what());
        } catch (const std::invalid_argument&) {
            send_error(res, 400, "invalid_argument", "malformed event sequence number");
        } catch (const std::out_of_range&) {
            send_error(res, 400, "invalid_argument", "event sequence number out of range");
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

std::string sse_frame(const SessionEvent& e)
{
    return "id: " + std::to_string(e.seq) + "\nevent: " + e.type + "\ndata: " + e.data.dump() + "\n\n";
}

} // namespace

SessionOptions session_options(const config::RunConfig& config)
{
    SessionOptions o;
    o.agent = config.agent;
    o.retry_budget = config.retry_budget;
    o.hems = config.hems;
    o.tariff = config.tariff;
    o.scenario_seed = config.scenario_seed;
    return o;
}

Server::Server(SessionManager& sessions, const config::ServiceConfig& config)
    : sessions_(sessions), config_(config), http_(std::make_unique<httplib::Server>())
{
    const unsigned threads = std::max(2u, config_.threads);
    http_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    routes();
}

Server::~Server() { stop(); }

void Server::routes()
{
    http_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http_->Get("/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });

    http_->Post("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
        auto session = sessions_.create();
        send_json(res, 201, session->snapshot());
    }));

    http_->Post(R"(/sessions/([^/]+)/answers)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        sessions_.evict_idle();
        auto session = sessions_.get(req.matches[1]);
        const auto body = nlohmann::json::parse(req.body);
        const auto it = body.find("answer");
        if (it == body.end() || !it->is_string())
            throw InvalidArgument("body must be {\"answer\": \"...\"}");
        try {
            session->submit_answer(it->get<std::string>());
        } catch (const ProviderError&) {
            sessions_.persist(*session);
            throw;
        }
        sessions_.persist(*session);
        send_json(res, 200, session->snapshot());
    }));

    http_->Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, sessions_.get(req.matches[1])->snapshot());
    }));

    http_->Get(R"(/sessions/([^/]+)/schedule)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, sessions_.get(req.matches[1])->schedule());
    }));

    http_->Get(R"(/sessions/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto session = sessions_.get(req.matches[1]);
        std::uint64_t after = 0;
        if (req.has_param("after"))
            after = std::stoull(req.get_param_value("after"));
        else if (req.has_header("Last-Event-ID"))
            after = std::stoull(req.get_header_value("Last-Event-ID"));
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [session, after](std::size_t, httplib::DataSink& sink) mutable {
                const auto events = session->events_after(after, std::chrono::milliseconds(500));
                for (const auto& e : events) {
                    const auto frame = sse_frame(e);
                    if (!sink.write(frame.data(), frame.size()))
                        return false;
                    after = e.seq;
                }
                if (events.empty()) {
                    if (session->finished()) {
                        sink.done();
                        return true;
                    }
                    static constexpr std::string_view kKeepAlive = ": keep-alive\n\n";
                    return sink.write(kKeepAlive.data(), kKeepAlive.size());
                }
                return true;
            });
    }));
}

int Server::bind()
{
    if (config_.port == 0)
        return http_->bind_to_any_port(config_.host);
    if (!http_->bind_to_port(config_.host, config_.port))
        throw Error(ErrorCode::config, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    return config_.port;
}

void Server::listen() { http_->listen_after_bind(); }

void Server::stop()
{
    if (http_ && http_->is_running())
        http_->stop();
}

} // namespace hems::service
