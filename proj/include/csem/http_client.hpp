#pragma once

#include <string>

#include "csem/common.hpp"
#include "httplib.h"
#include "json.hpp"

namespace csem::detail {

struct ParsedUrl {
  std::string host_port;  // scheme://host:port
  std::string path;       // leading slash
};

inline ParsedUrl parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw NetworkError("bad endpoint URL (missing scheme): " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// POST with JSON body; retries up to max_retries, then throws NetworkError.
inline nlohmann::json http_post_json(const std::string& url, const nlohmann::json& body,
                                     double timeout_sec, int max_retries) {
  ParsedUrl parsed = parse_url(url);
  std::string payload = body.dump();
  std::string last_error = "no attempt made";
  int attempts = std::max(1, max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    httplib::Client client(parsed.host_port);
    auto micros = static_cast<time_t>(timeout_sec * 1e6);
    client.set_connection_timeout(0, std::max<time_t>(1, micros));
    client.set_read_timeout(0, std::max<time_t>(1, micros));
    client.set_write_timeout(0, std::max<time_t>(1, micros));
    auto res = client.Post(parsed.path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    nlohmann::json parsed_body = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed_body.is_discarded()) {
      last_error = "unparseable JSON response";
      continue;
    }
    return parsed_body;
  }
  throw NetworkError("POST " + url + " failed after " + std::to_string(attempts) +
                     " attempts: " + last_error);
}

}  // namespace csem::detail
