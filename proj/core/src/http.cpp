#include "medscribe/http.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <cstdlib>

#include "medscribe/error.hpp"

namespace medscribe {

ServiceEndpoint ServiceEndpoint::from_json(const nlohmann::json& j) {
  ServiceEndpoint e;
  if (!j.is_object() || !j.contains("url") || !j["url"].is_string()) {
    throw Error(ErrorCode::ConfigError, "endpoint needs a string 'url'");
  }
  e.url = j["url"].get<std::string>();
  if (j.contains("token_env")) {
    const auto name = j["token_env"].get<std::string>();
    if (const char* v = std::getenv(name.c_str())) e.bearer_token = v;
  }
  e.timeout_seconds = j.value("timeout_seconds", 30.0);
  return e;
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host:port
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("endpoint url '{}' has no scheme", url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

nlohmann::json post_json(const ServiceEndpoint& endpoint,
                         const nlohmann::json& body) {
  const auto [origin, path] = split_url(endpoint.url);
  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(endpoint.timeout_seconds);
  const auto usecs = static_cast<time_t>(
      (endpoint.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!endpoint.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.bearer_token);
  }
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw HttpError(ErrorCode::TransportError,
                    fmt::format("POST {} failed: {}", endpoint.url,
                                httplib::to_string(res.error())),
                    0);
  }
  if (res->status >= 500) {
    throw HttpError(ErrorCode::ServiceUnavailable,
                    fmt::format("POST {} returned {}", endpoint.url, res->status),
                    res->status);
  }
  if (res->status < 200 || res->status >= 300) {
    throw HttpError(ErrorCode::HttpStatus,
                    fmt::format("POST {} returned {}", endpoint.url, res->status),
                    res->status);
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw HttpError(ErrorCode::SchemaMismatch,
                    fmt::format("POST {}: response is not JSON: {}",
                                endpoint.url, e.what()),
                    res->status);
  }
}

}  // namespace medscribe
