#pragma once

#include <map>
#include <memory>
#include <string>
#include <thread>

#include "mmlhub/platform.hpp"

namespace mmlhub {

struct HttpRequest {
  std::string method;  // GET, POST, DELETE
  std::string path;    // decoded, without the query string
  std::map<std::string, std::string> params;
  std::map<std::string, std::string> headers;  // keys lowercased
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Transport-independent router over the JSON API. Every response carries
/// the served corpus hash in X-Corpus-Hash (empty before the first ingest).
/// Mutating routes take `Authorization: Bearer <token>`.
class HttpApi {
 public:
  explicit HttpApi(Platform& platform) : platform_(platform) {}

  HttpResponse handle(const HttpRequest& request);

 private:
  Platform& platform_;
};

/// cpp-httplib adapter around HttpApi.
class HttpServer {
 public:
  explicit HttpServer(Platform& platform);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Blocks until stop(). Throws Io if the address cannot be bound.
  void listen(const std::string& host, int port);

  /// Binds (port 0 picks a free one), serves on a background thread and
  /// returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace mmlhub
