#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "icsim/study.hpp"

namespace httplib {
class Server;
}

namespace icsim::study {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // When set, GET /api/results requires ?token=<admin_token>.
  std::string admin_token;
  // Optional directory of static files (the annotation UI bundle) served at /.
  std::filesystem::path static_dir;
};

// JSON API over a StudyService:
//   GET  /api/health
//   GET  /api/study
//   POST /api/raters          {"rater_id"?: string}         -> 201 {"rater_id"}
//   GET  /api/items/next?rater=ID                           -> 200 payload | 410 when exhausted
//   POST /api/ratings         {rater_id, item_id, q_style, q_structure, q_overall, justification?}
//   GET  /api/results[?token=]
// Errors come back as {"error": message} with 400, 403, 404 or 409.
class StudyServer {
 public:
  StudyServer(StudyService& service, ServerOptions options);
  ~StudyServer();
  StudyServer(const StudyServer&) = delete;
  StudyServer& operator=(const StudyServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Blocks until stop() is called from elsewhere.
  void wait();
  void stop();
  int port() const { return port_; }

 private:
  void routes();

  StudyService& service_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace icsim::study
