#include "semflow/service.hpp"

#include <openssl/rand.h>

#include <charconv>
#include <httplib.h>
#include <sstream>

#include "semflow/errors.hpp"

namespace semflow {

using nlohmann::json;

struct ExplorationService::Session {
  Session(const Analysis& a, const ViewOptions& v, std::chrono::steady_clock::time_point now)
      : explorer(a, v), last_access(now) {}
  std::mutex mu;
  Explorer explorer;
  std::chrono::steady_clock::time_point last_access;
};

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

ExplorationService::ExplorationService(Analysis analysis, std::string analysis_hash,
                                       ViewOptions view, ServiceConfig cfg, Clock clock)
    : analysis_(std::move(analysis)),
      hash_(std::move(analysis_hash)),
      view_(view),
      cfg_(std::move(cfg)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })) {}

ExplorationService::~ExplorationService() = default;

std::size_t ExplorationService::session_count() const {
  std::lock_guard lock(sessions_mu_);
  return sessions_.size();
}

std::string ExplorationService::new_session_id() {
  unsigned char buf[16];
  if (RAND_bytes(buf, sizeof buf) != 1) throw Error("cannot generate session id");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (unsigned char b : buf) {
    id.push_back(kHex[b >> 4]);
    id.push_back(kHex[b & 0xF]);
  }
  return id;
}

std::shared_ptr<ExplorationService::Session> ExplorationService::find_session(
    const std::string& id) {
  std::lock_guard lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  const auto now = clock_();
  std::shared_ptr<Session> s = it->second;
  std::lock_guard slock(s->mu);
  if (now - s->last_access > cfg_.session_timeout) {
    sessions_.erase(it);
    return nullptr;
  }
  s->last_access = now;
  return s;
}

json ExplorationService::view_json(const ViewModel& vm) const {
  json j = to_json(vm);
  j["colors"] = {{"incorrect", view_.colors.incorrect.hex()},
                 {"correct", view_.colors.correct.hex()}};
  j["analysis_hash"] = hash_;
  return j;
}

ApiResponse ExplorationService::create_session() {
  const auto now = clock_();
  auto s = std::make_shared<Session>(analysis_, view_, now);
  std::string id = new_session_id();
  std::lock_guard lock(sessions_mu_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::lock_guard slock(it->second->mu);
    if (now - it->second->last_access > cfg_.session_timeout) {
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
  sessions_.emplace(id, std::move(s));
  return {201, {{"session_id", id}, {"analysis_hash", hash_}}};
}

ApiResponse ExplorationService::get_view(Session& s) {
  std::lock_guard lock(s.mu);
  return {200, view_json(s.explorer.view())};
}

ApiResponse ExplorationService::push_filter(Session& s, const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    return {400, {{"error", "request body is not valid JSON"}}};
  }
  if (!j.is_object() || !j.contains("variant_id") || !j["variant_id"].is_string()) {
    return {400, {{"error", "body must be an object with a string variant_id"}}};
  }
  for (const auto& [k, _] : j.items()) {
    if (k != "variant_id" && k != "error_kind") return {400, {{"error", "unknown field: " + k}}};
  }
  auto vid = VariantId::parse(j["variant_id"].get<std::string>());
  if (!vid) return {400, {{"error", "malformed variant_id"}}};
  FilterTerm term{*vid, std::nullopt};
  if (j.contains("error_kind") && !j["error_kind"].is_null()) {
    if (!j["error_kind"].is_string()) return {400, {{"error", "error_kind must be a string"}}};
    term.error_kind = j["error_kind"].get<std::string>();
  }
  std::lock_guard lock(s.mu);
  return {200, view_json(s.explorer.push(term))};
}

ApiResponse ExplorationService::pop_filter(Session& s) {
  std::lock_guard lock(s.mu);
  return {200, view_json(s.explorer.pop())};
}

ApiResponse ExplorationService::clear_filters(Session& s) {
  std::lock_guard lock(s.mu);
  return {200, view_json(s.explorer.clear())};
}

ApiResponse ExplorationService::list(Session& s, const std::string& vid_text,
                                     const std::map<std::string, std::string>& q) {
  auto vid = VariantId::parse(vid_text);
  if (!vid) return {400, {{"error", "malformed variant id"}}};
  int page = 0;
  if (auto it = q.find("page"); it != q.end()) {
    const std::string& p = it->second;
    auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), page);
    if (ec != std::errc() || ptr != p.data() + p.size() || page < 0) {
      return {400, {{"error", "page must be a non-negative integer"}}};
    }
  }
  std::optional<std::string> kind;
  if (auto it = q.find("error_kind"); it != q.end() && !it->second.empty()) kind = it->second;
  std::vector<bool> active;
  {
    std::lock_guard lock(s.mu);
    active = s.explorer.active();
  }
  json j = to_json(list_submissions(analysis_, active, *vid, kind, page, view_.page_size));
  j["analysis_hash"] = hash_;
  return {200, std::move(j)};
}

ApiResponse ExplorationService::healthz() const {
  return {200,
          {{"status", "ok"},
           {"corpus_size", analysis_.submissions.size()},
           {"analysis_hash", hash_}}};
}

ApiResponse ExplorationService::handle(const ApiRequest& req) {
  ApiResponse res;
  try {
    const auto seg = split_path(req.path);
    const std::string& m = req.method;
    auto not_allowed = [] { return ApiResponse{405, {{"error", "method not allowed"}}}; };
    if (seg.size() == 1 && seg[0] == "healthz") {
      res = m == "GET" ? healthz() : not_allowed();
    } else if (seg.size() == 1 && seg[0] == "sessions") {
      res = m == "POST" ? create_session() : not_allowed();
    } else if (seg.size() >= 3 && seg[0] == "sessions") {
      auto session = find_session(seg[1]);
      const bool known_route =
          (seg.size() == 3 && (seg[2] == "view" || seg[2] == "filters")) ||
          (seg.size() == 4 && seg[2] == "filters" && seg[3] == "last") ||
          (seg.size() == 5 && seg[2] == "variants" && seg[4] == "submissions");
      if (!known_route) {
        res = {404, {{"error", "no such route"}}};
      } else if (!session) {
        res = {404, {{"error", "unknown or expired session"}}};
      } else if (seg.size() == 3 && seg[2] == "view") {
        res = m == "GET" ? get_view(*session) : not_allowed();
      } else if (seg.size() == 3) {
        if (m == "POST") {
          res = push_filter(*session, req.body);
        } else if (m == "DELETE") {
          res = clear_filters(*session);
        } else {
          res = not_allowed();
        }
      } else if (seg.size() == 4) {
        res = m == "DELETE" ? pop_filter(*session) : not_allowed();
      } else {
        res = m == "GET" ? list(*session, seg[3], req.query) : not_allowed();
      }
    } else {
      res = {404, {{"error", "no such route"}}};
    }
  } catch (const UnknownVariant& e) {
    res = {404, {{"error", e.what()}}};
  } catch (const UnknownErrorKind& e) {
    res = {400, {{"error", e.what()}}};
  } catch (const EmptyStack& e) {
    res = {409, {{"error", e.what()}}};
  } catch (const std::exception& e) {
    res = {500, {{"error", e.what()}}};
  }
  if (res.status >= 400) res.body["analysis_hash"] = hash_;
  return res;
}

void ExplorationService::mount(httplib::Server& server) {
  const std::string origin = cfg_.cors_origin;
  // The pre-routing hook runs before httplib reads request bodies, so it only
  // adds CORS headers and answers preflight requests.
  server.set_pre_routing_handler(
      [origin](const httplib::Request& req, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        if (req.method != "OPTIONS") return httplib::Server::HandlerResponse::Unhandled;
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
        return httplib::Server::HandlerResponse::Handled;
      });
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api{req.method, req.path, req.body, {}};
    for (const auto& [k, v] : req.params) api.query.emplace(k, v);
    ApiResponse out = handle(api);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get(".*", dispatch);
  server.Post(".*", dispatch);
  server.Delete(".*", dispatch);
  server.Put(".*", dispatch);
  server.Patch(".*", dispatch);
}

}  // namespace semflow
