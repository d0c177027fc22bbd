#include "afp/errors.hpp"
#include "afp/semantic_graph.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <regex>

namespace afp {

HttpChatClient::HttpChatClient(std::string endpoint_url,
                               std::chrono::milliseconds timeout,
                               std::optional<std::string> api_key)
  : timeout_(timeout)
  , api_key_(std::move(api_key))
{
  static const std::regex url_re(R"(^(https?://[^/?#]+)([^?#]*)$)");
  std::smatch m;
  if (!std::regex_match(endpoint_url, m, url_re))
    throw ValidationError("endpoint '" + endpoint_url +
                          "' is not an http(s) URL");
  scheme_host_port_ = m[1].str();
  path_ = m[2].length() ? m[2].str() : std::string("/");
}

HttpChatClient HttpChatClient::from_environment(std::string endpoint_url,
                                                std::chrono::milliseconds timeout)
{
  std::optional<std::string> key;
  if (const char* v = std::getenv(kApiKeyEnv); v && *v)
    key = v;
  return HttpChatClient(std::move(endpoint_url), timeout, std::move(key));
}

std::string HttpChatClient::request_body(const std::string& user_message)
{
  nlohmann::json body;
  body["messages"] = nlohmann::json::array(
    { { { "role", "user" }, { "content", user_message } } });
  return body.dump();
}

std::string HttpChatClient::complete(const std::string& user_message)
{
  httplib::Client cli(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs =
    std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (api_key_)
    headers.emplace("Authorization", "Bearer " + *api_key_);

  auto res =
    cli.Post(path_, headers, request_body(user_message), "application/json");
  if (!res)
    throw TransportError("request to " + scheme_host_port_ + path_ +
                         " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw TransportError("request to " + scheme_host_port_ + path_ +
                         " returned HTTP " + std::to_string(res->status));
  return res->body;
}

} // namespace afp
