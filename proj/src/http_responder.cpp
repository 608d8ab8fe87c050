#include "psyeval/http_responder.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "psyeval/errors.hpp"

namespace psyeval {

HttpResponder::HttpResponder(HttpResponderConfig config) : config_(std::move(config)) {
  if (config_.model.empty()) throw ConfigError("HTTP responder needs a model name");
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint '" + config_.endpoint + "' must start with http:// or https://");
  }
  const std::string scheme = config_.endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported endpoint scheme " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("this build has no TLS support; use an http:// endpoint");
#endif
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  origin_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "" : config_.endpoint.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  if (origin_.size() <= scheme_end + 3) throw ConfigError("endpoint '" + config_.endpoint + "' has no host");
}

HttpResponderConfig HttpResponder::from_environment(std::string endpoint, std::string model) {
  HttpResponderConfig cfg;
  cfg.endpoint = std::move(endpoint);
  cfg.model = std::move(model);
  if (const char* key = std::getenv("RESPONDER_API_KEY")) cfg.api_key = key;
  return cfg;
}

std::string HttpResponder::complete(const CompletionRequest& request) {
  nlohmann::json body = {
      {"model", config_.model},
      {"temperature", request.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
  };
  httplib::Client client(origin_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_ + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw TransportError("request to " + origin_ + " failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ResponderError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ResponderError(std::string("malformed completion reply: ") + e.what());
  }
}

}  // namespace psyeval
