#pragma once

#include <string>

#include "psyeval/simulate.hpp"

namespace psyeval {

struct HttpResponderConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1
  std::string model;
  std::string api_key;   // sent as a bearer token when non-empty
  int timeout_seconds = 60;
};

// OpenAI-style chat completions client: POST {endpoint}/chat/completions.
class HttpResponder : public Responder {
 public:
  // Throws ConfigError for a malformed endpoint or missing model.
  explicit HttpResponder(HttpResponderConfig config);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

  // Reads RESPONDER_API_KEY from the environment.
  static HttpResponderConfig from_environment(std::string endpoint, std::string model);

 private:
  HttpResponderConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // base path without trailing slash
};

}  // namespace psyeval
