#include "abkit/service/http.hpp"

#include <httplib.h>

#include "abkit/error.hpp"

namespace abkit::service {

using json = nlohmann::ordered_json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, json{{"error", std::string(to_string(code))}, {"message", message}},
            http_status(code));
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, ErrorCode::MalformedRecord, e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, ErrorCode::InvalidArgument, e.what());
    } catch (const std::out_of_range& e) {
      send_error(res, ErrorCode::InvalidArgument, e.what());
    }
  };
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownAssignment: return 404;
    case ErrorCode::ClosedAssignment:
    case ErrorCode::PageAlreadySubmitted:
    case ErrorCode::NoPagesSubmitted: return 409;
    case ErrorCode::NonMonotoneTimestamp:
    case ErrorCode::InvariantViolation:
    case ErrorCode::OutsideImage: return 422;
    case ErrorCode::MalformedRecord:
    case ErrorCode::InvalidArgument: return 400;
    default: return 500;
  }
}

HttpServer::HttpServer(AnnotationService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& svc = service_;

  server_->Get(R"(/hit/([^/]+)/page/(\d+))", guarded([&svc](const auto& req, auto& res) {
                 send_json(res, svc.page_payload(req.matches[1], std::stoi(req.matches[2])));
               }));

  server_->Post(R"(/hit/([^/]+)/events)", guarded([&svc](const auto& req, auto& res) {
                  const json body = json::parse(req.body);
                  const json& list = body.is_array() ? body : body.at("events");
                  if (!list.is_array()) throw Error(ErrorCode::MalformedRecord, "events must be an array");
                  std::vector<Event> events;
                  for (const auto& e : list) events.push_back(event_from_json(e, svc.options().strict));
                  const auto ack = svc.ingest_events(req.matches[1], events);
                  send_json(res, json{{"accepted", ack.accepted}, {"hwm", ack.high_water_mark}});
                }));

  server_->Post(R"(/hit/([^/]+)/page/(\d+)/submit)", guarded([&svc](const auto& req, auto& res) {
                  const json body = req.body.empty() ? json::object() : json::parse(req.body);
                  Submission sub;
                  sub.t = body.at("t").template get<std::int64_t>();
                  sub.raw_worker_id = body.value("worker_id", std::string{});
                  const auto built = svc.finalize_page(req.matches[1], std::stoi(req.matches[2]), sub);
                  json records = json::array();
                  for (const auto& line : built.lines()) records.push_back(json::parse(line));
                  send_json(res, json{{"records", std::move(records)}});
                }));

  server_->Get(R"(/hit/([^/]+)/code)", guarded([&svc](const auto& req, auto& res) {
                 send_json(res, json{{"code", svc.issue_completion_code(req.matches[1])}});
               }));

  server_->Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, json{{"status", "ok"}});
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

bool HttpServer::is_running() const { return server_->is_running(); }

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace abkit::service
