#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>

#include "semflow/aggregator.hpp"
#include "semflow/analysis.hpp"
#include "semflow/config.hpp"

namespace httplib {
class Server;
}

namespace semflow {

struct ApiRequest {
  std::string method;  // GET, POST, DELETE, OPTIONS
  std::string path;
  std::string body;
  std::map<std::string, std::string> query;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;

// Session-scoped filter stacks over one immutable analysis. Thread-safe:
// the session table has its own lock and each session serializes its
// mutations.
class ExplorationService {
 public:
  ExplorationService(Analysis analysis, std::string analysis_hash, ViewOptions view = {},
                     ServiceConfig cfg = {}, Clock clock = {});
  ~ExplorationService();

  ApiResponse handle(const ApiRequest& req);

  // Registers every route (plus CORS preflight) on `server`.
  void mount(httplib::Server& server);

  const Analysis& analysis() const noexcept { return analysis_; }
  const std::string& analysis_hash() const noexcept { return hash_; }
  std::size_t session_count() const;

 private:
  struct Session;

  std::shared_ptr<Session> find_session(const std::string& id);
  std::string new_session_id();
  nlohmann::json view_json(const ViewModel& vm) const;

  ApiResponse create_session();
  ApiResponse get_view(Session& s);
  ApiResponse push_filter(Session& s, const std::string& body);
  ApiResponse pop_filter(Session& s);
  ApiResponse clear_filters(Session& s);
  ApiResponse list(Session& s, const std::string& vid, const std::map<std::string, std::string>& q);
  ApiResponse healthz() const;

  const Analysis analysis_;
  const std::string hash_;
  const ViewOptions view_;
  const ServiceConfig cfg_;
  Clock clock_;

  mutable std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace semflow
