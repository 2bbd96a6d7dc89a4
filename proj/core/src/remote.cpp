#include "cfrisk/remote.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>

namespace cfrisk
{

const char * to_string(RemoteErrorKind k)
{
  switch (k) {
    case RemoteErrorKind::transport: return "transport";
    case RemoteErrorKind::timeout: return "timeout";
    case RemoteErrorKind::http_status: return "http_status";
    case RemoteErrorKind::bad_payload: return "bad_payload";
  }
  return "transport";
}

namespace
{

struct ParsedUrl
{
  std::string base;  // scheme://host:port
  std::string path;
};

std::optional<ParsedUrl> parse_url(const std::string & url)
{
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    return std::nullopt;
  }
  if (url.substr(0, scheme_end) != "http") {
    return std::nullopt;  // client is built without TLS
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return ParsedUrl{url, "/"};
  }
  return ParsedUrl{url.substr(0, path_start), url.substr(path_start)};
}

RemoteError classify(httplib::Error err)
{
  switch (err) {
    case httplib::Error::ConnectionTimeout:
      return {RemoteErrorKind::timeout, "connection timed out"};
    case httplib::Error::Read:
      // read timeouts surface as read failures
      return {RemoteErrorKind::timeout, "read timed out or connection dropped"};
    default:
      return {RemoteErrorKind::transport, httplib::to_string(err)};
  }
}

}  // namespace

RemoteResult query_remote_model(
  const std::string & sample_id, const std::string & prompt, const EndpointDescriptor & endpoint)
{
  RemoteResult result;

  const auto parsed = parse_url(endpoint.url);
  if (!parsed) {
    result.error = RemoteError{
      RemoteErrorKind::transport, "unsupported endpoint url: " + endpoint.url};
    return result;
  }

  const std::string body =
    nlohmann::json{{"sample_id", sample_id}, {"prompt", prompt}}.dump();

  const auto timeout =
    std::chrono::milliseconds(std::llround(std::max(0.001, endpoint.timeout_s) * 1000.0));
  const int attempts = 1 + std::max(0, endpoint.retries);

  for (int attempt = 0; attempt < attempts; ++attempt) {
    httplib::Client client(parsed->base);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(parsed->path, body, "application/json");
    if (!res) {
      result.error = classify(res.error());
      continue;  // transport and timeout failures are retryable
    }
    if (res->status != 200) {
      result.error = RemoteError{
        RemoteErrorKind::http_status, "status " + std::to_string(res->status)};
      if (res->status >= 500) {
        continue;
      }
      return result;
    }

    nlohmann::json payload = nlohmann::json::parse(res->body, nullptr, false);
    if (payload.is_discarded() || !payload.is_object() || !payload.contains("text") ||
        !payload["text"].is_string()) {
      result.error = RemoteError{
        RemoteErrorKind::bad_payload, "response body is not {sample_id, text}"};
      return result;
    }
    if (payload.contains("sample_id") && payload["sample_id"].is_string() &&
        payload["sample_id"].get<std::string>() != sample_id) {
      result.error = RemoteError{
        RemoteErrorKind::bad_payload,
        "response names sample '" + payload["sample_id"].get<std::string>() + "'"};
      return result;
    }
    result.text = payload["text"].get<std::string>();
    result.error.reset();
    return result;
  }
  return result;
}

}  // namespace cfrisk
