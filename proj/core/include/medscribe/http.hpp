#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace medscribe {

// Where a JSON-over-HTTP service lives. Credentials never appear in config
// files directly: `token_env` names the environment variable to read.
struct ServiceEndpoint {
  std::string url;  // http(s)://host[:port]/path
  std::string bearer_token;
  double timeout_seconds = 30.0;

  // {"url": ..., "token_env": "NAME", "timeout_seconds": 30}
  static ServiceEndpoint from_json(const nlohmann::json& j);
};

// POSTs `body` and returns the parsed JSON response. Throws HttpError with
// TransportError (no response), ServiceUnavailable (5xx), HttpStatus (other
// non-2xx) or SchemaMismatch (body is not JSON).
nlohmann::json post_json(const ServiceEndpoint& endpoint,
                         const nlohmann::json& body);

}  // namespace medscribe
