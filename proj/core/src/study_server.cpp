#include "icsim/study_server.hpp"

#include <httplib.h>

namespace icsim::study {
namespace {

void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

}  // namespace

StudyServer::StudyServer(StudyService& service, ServerOptions options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

StudyServer::~StudyServer() { stop(); }

void StudyServer::routes() {
  auto& s = *server_;
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      fail(res, 500, e.what());
    }
  });

  s.Get("/api/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"status", "ok"}}); });

  s.Get("/api/study", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, service_.metadata());
  });

  s.Post("/api/raters", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> requested;
    if (!req.body.empty()) {
      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) return fail(res, 400, "body must be a JSON object");
      if (const auto it = body.find("rater_id"); it != body.end()) {
        if (!it->is_string()) return fail(res, 400, "rater_id must be a string");
        requested = it->get<std::string>();
      }
    }
    try {
      reply(res, 201, {{"rater_id", service_.register_rater(requested)}});
    } catch (const InvalidArgument& e) {
      fail(res, 400, e.what());
    }
  });

  s.Get("/api/items/next", [this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("rater")) return fail(res, 400, "missing rater parameter");
    try {
      const auto payload = service_.next_item(req.get_param_value("rater"));
      if (!payload) return fail(res, 410, "no items left for this rater");
      reply(res, 200, *payload);
    } catch (const NotFound& e) {
      fail(res, 404, e.what());
    }
  });

  s.Post("/api/ratings", [this](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return fail(res, 400, "body must be JSON");
    try {
      const RatingRecord stored = service_.submit(RatingRecord::from_json(body));
      reply(res, 201, {{"status", "accepted"}, {"item_id", stored.item_id}});
    } catch (const NotFound& e) {
      fail(res, 404, e.what());
    } catch (const Conflict& e) {
      fail(res, 409, e.what());
    } catch (const InvalidArgument& e) {
      fail(res, 400, e.what());
    }
  });

  s.Get("/api/results", [this](const httplib::Request& req, httplib::Response& res) {
    if (!options_.admin_token.empty() &&
        (!req.has_param("token") || req.get_param_value("token") != options_.admin_token)) {
      return fail(res, 403, "admin token required");
    }
    reply(res, 200, service_.results().to_json());
  });

  if (!options_.static_dir.empty()) s.set_mount_point("/", options_.static_dir.string());
}

int StudyServer::start() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) throw Error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void StudyServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void StudyServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace icsim::study
