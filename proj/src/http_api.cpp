#include "uavstop/http_api.hpp"

#include "httplib.h"
#include "uavstop/errors.hpp"

namespace uavstop {

using nlohmann::json;

struct HttpApi::Impl {
  ExperimentService& service;
  httplib::Server server;

  explicit Impl(ExperimentService& s) : service(s) { routes(); }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void fail(httplib::Response& res, const std::string& code, int status, const std::string& message) {
    reply(res, status, {{"error", {{"code", code}, {"message", message}}}});
  }

  // Parses the body as a JSON object; an empty body is an empty object.
  static json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j;
    try {
      j = json::parse(req.body);
    } catch (const json::parse_error&) {
      throw ServiceError("validation", 400, "request body is not valid JSON");
    }
    if (!j.is_object()) throw ServiceError("validation", 400, "request body must be a JSON object");
    return j;
  }

  static json field(const json& body, const char* key) {
    const auto it = body.find(key);
    if (it == body.end()) throw ServiceError("validation", 400, std::string("missing field '") + key + "'");
    return *it;
  }

  template <class F>
  void on(const char* method, const std::string& pattern, F handler, int ok_status = 200) {
    auto wrapped = [handler, ok_status](const httplib::Request& req, httplib::Response& res) {
      try {
        reply(res, ok_status, handler(req));
      } catch (const ServiceError& e) {
        fail(res, e.code(), e.http_status(), e.what());
      } catch (const std::exception& e) {
        fail(res, "internal", 500, e.what());
      }
    };
    if (std::string(method) == "GET")
      server.Get(pattern, wrapped);
    else
      server.Post(pattern, wrapped);
  }

  void routes() {
    auto& svc = service;
    const std::string base = "/api/sessions/:id";
    on(
        "POST", "/api/sessions",
        [&svc](const httplib::Request& req) {
          const auto body = body_of(req);
          std::optional<Treatment> forced;
          if (const auto it = body.find("treatment"); it != body.end() && !it->is_null()) {
            if (!it->is_string()) throw ServiceError("validation", 400, "treatment must be a string");
            try {
              forced = parse_treatment(it->get<std::string>());
            } catch (const ValidationError& e) {
              throw ServiceError("validation", 400, e.what());
            }
          }
          return svc.create_session(forced);
        },
        201);
    on("GET", base, [&svc](const httplib::Request& req) { return svc.state(req.path_params.at("id")); });
    on("POST", base + "/instructions/ack",
       [&svc](const httplib::Request& req) { return svc.ack_instructions(req.path_params.at("id")); });
    on("POST", base + "/quiz", [&svc](const httplib::Request& req) {
      return svc.submit_quiz(req.path_params.at("id"), field(body_of(req), "answers"));
    });
    on("POST", base + "/decision", [&svc](const httplib::Request& req) {
      const auto fly = field(body_of(req), "fly");
      if (!fly.is_boolean()) throw ServiceError("validation", 400, "fly must be a boolean");
      return svc.decide_round(req.path_params.at("id"), fly.get<bool>());
    });
    on("POST", base + "/plan", [&svc](const httplib::Request& req) {
      return svc.submit_plan(req.path_params.at("id"), field(body_of(req), "plan"));
    });
    on("POST", base + "/questionnaire", [&svc](const httplib::Request& req) {
      return svc.submit_questionnaire(req.path_params.at("id"), body_of(req));
    });
    on("POST", base + "/mpl", [&svc](const httplib::Request& req) {
      return svc.submit_mpl(req.path_params.at("id"), field(body_of(req), "choices"));
    });
    on("GET", base + "/result", [&svc](const httplib::Request& req) { return svc.result(req.path_params.at("id")); });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) fail(res, res.status == 404 ? "not_found" : "http", res.status, "no such route");
    });
  }
};

HttpApi::HttpApi(ExperimentService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpApi::~HttpApi() = default;

int HttpApi::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpApi::listen() { return impl_->server.listen_after_bind(); }
void HttpApi::stop() { impl_->server.stop(); }

}  // namespace uavstop
