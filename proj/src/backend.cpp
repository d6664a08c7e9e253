#include <nlohmann/json.hpp>

#include "httplib.h"
#include "kbp/errors.hpp"
#include "kbp/genloop.hpp"

namespace kbp::genloop {

namespace {

struct ParsedEndpoint {
  std::string host;
  int port = 80;
  std::string path = "/v1/chat/completions";
};

ParsedEndpoint parse_endpoint(const std::string& url) {
  std::string rest = url;
  if (rest.rfind("https://", 0) == 0)
    throw ConfigError("https endpoints are not supported; use a plain http endpoint");
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  if (rest.empty()) throw ConfigError("endpoint URL is empty");

  ParsedEndpoint ep;
  std::size_t slash = rest.find('/');
  std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
  if (slash != std::string::npos && slash + 1 < rest.size()) ep.path = rest.substr(slash);

  std::size_t colon = authority.find(':');
  if (colon == std::string::npos) {
    ep.host = authority;
  } else {
    ep.host = authority.substr(0, colon);
    try {
      ep.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("invalid port in endpoint '" + url + "'");
    }
  }
  if (ep.host.empty()) throw ConfigError("endpoint '" + url + "' has no host");
  return ep;
}

}  // namespace

HttpBackend::HttpBackend(std::string endpoint, std::string model, std::string api_key)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_(std::move(api_key)) {
  parse_endpoint(endpoint_);  // validate eagerly
}

std::string HttpBackend::complete(const std::vector<ChatMessage>& messages,
                                  const SamplingParams& params) {
  ParsedEndpoint ep = parse_endpoint(endpoint_);
  httplib::Client client(ep.host, ep.port);
  client.set_connection_timeout(10);
  client.set_read_timeout(300);

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string body = build_chat_request(model_, messages, params).dump();
  auto res = client.Post(ep.path, headers, body, "application/json");
  if (!res)
    throw TransportError("no response from " + endpoint_ + ": " + httplib::to_string(res.error()),
                         0, true);
  if (res->status < 200 || res->status >= 300) {
    bool retryable = res->status == 429 || res->status >= 500;
    throw TransportError("backend returned HTTP " + std::to_string(res->status), res->status,
                         retryable);
  }

  nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw ProtocolError("backend response is not JSON");
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
    throw ProtocolError("backend response has no choices");
  const auto& message = doc["choices"][0]["message"];
  if (!message.is_object() || !message.contains("content") || !message["content"].is_string())
    throw ProtocolError("backend response has no message content");
  return message["content"].get<std::string>();
}

}  // namespace kbp::genloop
