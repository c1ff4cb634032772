#include "mmlhub/http_api.hpp"

#include <algorithm>
#include <optional>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mmlhub/error.hpp"
#include "mmlhub/queries.hpp"
#include "mmlhub/text.hpp"

namespace mmlhub {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::UserBlocked:
    case ErrorCode::Forbidden: return 403;
    case ErrorCode::UnknownAnchor:
    case ErrorCode::UnknownArticle:
    case ErrorCode::UnknownNode:
    case ErrorCode::UnknownRevision: return 404;
    case ErrorCode::FrozenArticle: return 409;
    case ErrorCode::NoCorpus: return 503;
    case ErrorCode::CorruptData:
    case ErrorCode::ConvergenceFailure: return 500;
    default: return 400;
  }
}

HttpResponse json_response(int status, std::string body) {
  HttpResponse r;
  r.status = status;
  r.body = std::move(body);
  return r;
}

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  ordered_json j;
  j["error"] = std::string(code);
  j["message"] = std::string(message);
  return json_response(status, j.dump() + "\n");
}

std::vector<std::string> segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    auto next = path.find('/', pos);
    if (next == std::string_view::npos) next = path.size();
    if (next > pos) out.emplace_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::optional<std::string> param(const HttpRequest& req, const std::string& key) {
  auto it = req.params.find(key);
  if (it == req.params.end()) return std::nullopt;
  return it->second;
}

bool flag_param(const HttpRequest& req, const std::string& key) {
  auto v = param(req, key);
  if (!v) return false;
  if (*v == "true" || *v == "1" || v->empty()) return true;
  if (*v == "false" || *v == "0") return false;
  throw Error(ErrorCode::InvalidArgument, key + " must be true or false");
}

std::size_t size_value(const std::string& text, const std::string& key) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      text.size() > 9)
    throw Error(ErrorCode::InvalidArgument, key + " must be a non-negative integer");
  return std::stoul(text);
}

json parse_body(const HttpRequest& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON body: ") + e.what());
  }
}

std::string string_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw Error(ErrorCode::InvalidArgument, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::size_t size_field(const json& j, const char* key, std::size_t fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_unsigned()) throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a non-negative integer");
  return it->get<std::size_t>();
}

std::shared_ptr<const CorpusState> require_state(const std::shared_ptr<const CorpusState>& state) {
  if (!state) throw Error(ErrorCode::NoCorpus, "no library has been ingested");
  return state;
}

}  // namespace

HttpResponse HttpApi::handle(const HttpRequest& req) {
  // One snapshot per request: the body and the X-Corpus-Hash header agree.
  auto state = platform_.state();
  HttpResponse response;
  try {
    const auto seg = segments(req.path);
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    const bool del = req.method == "DELETE";

    auto authenticate = [&](bool admin_only) -> User {
      std::optional<User> user;
      if (auto it = req.headers.find("authorization"); it != req.headers.end()) {
        std::string_view value = it->second;
        if (value.starts_with("Bearer ")) user = platform_.users().authenticate(value.substr(7));
      }
      if (!user) throw Error(ErrorCode::Unauthorized, "missing or invalid bearer token");
      if (user->blocked) throw Error(ErrorCode::UserBlocked, "user " + user->id + " is blocked");
      if (admin_only && user->role != Role::Admin) throw Error(ErrorCode::Forbidden, "administrator role required");
      return *user;
    };
    auto known_anchor = [&](const std::string& anchor) {
      if (!require_state(state)->has_anchor(anchor)) throw Error(ErrorCode::UnknownAnchor, "unknown anchor " + anchor);
    };

    if (seg.empty() || seg[0] != "api") {
      response = error_response(404, "NotFound", "no route for " + req.path);
    } else if (get && seg.size() == 2 && seg[1] == "status") {
      response = json_response(200, queries::status(platform_));
    } else if (get && seg.size() == 2 && seg[1] == "articles") {
      response = json_response(200, queries::articles(*require_state(state)));
    } else if (get && seg.size() == 3 && seg[1] == "articles") {
      response = json_response(200, queries::article(*require_state(state), seg[2], platform_.comments()));
    } else if (get && seg.size() == 3 && seg[1] == "search" && seg[2] == "names") {
      std::optional<EntryKind> kind;
      if (auto k = param(req, "kind"); k && !k->empty()) {
        kind = entry_kind_from_string(*k);
        if (!kind) throw Error(ErrorCode::InvalidArgument, "kind must be article or symbol");
      }
      auto limit = param(req, "limit");
      response = json_response(200, queries::names(*require_state(state), param(req, "q").value_or(""), kind,
                                                   limit ? size_value(*limit, "limit") : queries::kDefaultNameLimit));
    } else if (post && seg.size() == 3 && seg[1] == "search" && seg[2] == "theorems") {
      auto j = parse_body(req);
      response = json_response(200, queries::theorems(*require_state(state), string_field(j, "query"),
                                                      size_field(j, "limit", queries::kDefaultTheoremLimit)));
    } else if (post && seg.size() == 2 && seg[1] == "feedback") {
      auto user = authenticate(false);
      auto j = parse_body(req);
      auto anchor = string_field(j, "anchor");
      known_anchor(anchor);
      auto rec = record_feedback(platform_.feedback(), string_field(j, "query"), anchor, user.actor());
      ordered_json out{{"query", rec.query_text}, {"anchor", rec.anchor}, {"vote", rec.vote},
                       {"user", rec.user},        {"timestamp", rec.timestamp}};
      response = json_response(200, out.dump() + "\n");
    } else if (seg.size() >= 3 && seg[1] == "comments") {
      const std::string& anchor = seg[2];
      if (get && seg.size() == 3) {
        known_anchor(anchor);
        auto rev = platform_.comments().latest(anchor);
        if (!rev) throw Error(ErrorCode::UnknownRevision, "no comment on " + anchor);
        response = json_response(200, queries::revision(*rev));
      } else if (get && seg.size() == 4 && seg[3] == "history") {
        known_anchor(anchor);
        response = json_response(200, queries::history(platform_.comments().history(anchor)));
      } else if (post && seg.size() == 3) {
        auto user = authenticate(false);
        auto j = parse_body(req);
        response = json_response(200, queries::revision(platform_.save_comment(anchor, string_field(j, "body"),
                                                                               user.actor())));
      } else if (del && seg.size() == 3) {
        auto user = authenticate(false);
        known_anchor(anchor);
        if (platform_.is_frozen(anchor_article(anchor)))
          throw Error(ErrorCode::FrozenArticle, "comments on " + anchor_article(anchor) + " await conflict resolution");
        response = json_response(200, queries::revision(delete_comment(platform_.comments(), anchor, user.actor())));
      } else if (post && seg.size() == 4 && seg[3] == "rollback") {
        auto user = authenticate(false);
        known_anchor(anchor);
        if (platform_.is_frozen(anchor_article(anchor)))
          throw Error(ErrorCode::FrozenArticle, "comments on " + anchor_article(anchor) + " await conflict resolution");
        auto j = parse_body(req);
        auto to = j.find("to");
        if (to == j.end() || !to->is_number_unsigned())
          throw Error(ErrorCode::InvalidArgument, "'to' must be a revision id");
        response = json_response(
            200, queries::revision(rollback(platform_.comments(), anchor, to->get<std::uint64_t>(), user.actor())));
      } else {
        response = error_response(404, "NotFound", "no route for " + req.method + " " + req.path);
      }
    } else if (get && seg.size() == 2 && seg[1] == "graph") {
      response = json_response(200, queries::graph_json(*require_state(state), flag_param(req, "reduced")));
    } else if (get && seg.size() == 2 && (seg[1] == "graph.dot" || seg[1] == "graph.sfdp")) {
      const bool reduced = flag_param(req, "reduced");
      response.body = seg[1] == "graph.dot" ? queries::graph_dot(*require_state(state), reduced)
                                            : queries::graph_sfdp(*require_state(state), reduced);
      response.content_type = "text/vnd.graphviz";
    } else if (get && seg.size() == 3 && seg[1] == "graph" && seg[2] == "layers") {
      response.body = queries::layers_table(*require_state(state), flag_param(req, "reduced"));
      response.content_type = "text/tab-separated-values";
    } else if (get && seg.size() == 3 && seg[1] == "graph" && seg[2] == "neighborhood") {
      auto node = param(req, "node");
      if (!node) throw Error(ErrorCode::InvalidArgument, "node is required");
      auto radius = param(req, "radius");
      response = json_response(200, queries::neighborhood(*require_state(state), *node,
                                                          radius ? size_value(*radius, "radius") : 1,
                                                          flag_param(req, "reduced")));
    } else if (get && seg.size() == 3 && seg[1] == "graph" && seg[2] == "search") {
      response = json_response(200, queries::node_search(*require_state(state), param(req, "q").value_or("")));
    } else if (post && seg.size() == 5 && seg[1] == "admin" && seg[2] == "users" && seg[4] == "block") {
      authenticate(true);
      auto j = parse_body(req);
      bool blocked = true;
      if (auto b = j.find("blocked"); b != j.end()) {
        if (!b->is_boolean()) throw Error(ErrorCode::InvalidArgument, "blocked must be a boolean");
        blocked = b->get<bool>();
      }
      if (platform_.users().set_blocked(seg[3], blocked)) {
        ordered_json out{{"id", seg[3]}, {"blocked", blocked}};
        response = json_response(200, out.dump() + "\n");
      } else {
        response = error_response(404, "UnknownUser", "unknown user " + seg[3]);
      }
    } else if (post && seg.size() == 3 && seg[1] == "admin" && seg[2] == "update") {
      authenticate(true);
      auto j = parse_body(req);
      auto report = platform_.update_corpus(string_field(j, "path"), string_field(j, "label"));
      state = platform_.state();
      response = json_response(report.conflict_count > 0 ? 409 : 200, report.to_json());
    } else if (post && seg.size() == 4 && seg[1] == "admin" && seg[2] == "resolve") {
      auto user = authenticate(true);
      auto j = parse_body(req);
      platform_.resolve_conflict(seg[3], string_field(j, "text"), user.actor());
      ordered_json out{{"article", seg[3]}, {"resolved", true}};
      response = json_response(200, out.dump() + "\n");
    } else {
      response = error_response(404, "NotFound", "no route for " + req.method + " " + req.path);
    }
  } catch (const Error& e) {
    response = error_response(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    response = error_response(500, "Internal", e.what());
  }
  response.headers["X-Corpus-Hash"] = state ? state->corpus_hash : "";
  return response;
}

struct HttpServer::Impl {
  explicit Impl(Platform& platform) : api(platform) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      HttpRequest r;
      r.method = req.method;
      r.path = req.path;
      for (const auto& [k, v] : req.params) r.params.emplace(k, v);
      for (const auto& [k, v] : req.headers) r.headers.emplace(to_lower(k), v);
      r.body = req.body;
      auto out = api.handle(r);
      res.status = out.status;
      for (const auto& [k, v] : out.headers) res.set_header(k, v);
      res.set_content(out.body, out.content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Delete(".*", handler);
  }

  HttpApi api;
  httplib::Server server;
};

HttpServer::HttpServer(Platform& platform) : impl_(std::make_unique<Impl>(platform)) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port))
    throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

int HttpServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mmlhub
