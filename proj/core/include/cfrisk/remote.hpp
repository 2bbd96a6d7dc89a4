#ifndef CFRISK__REMOTE_HPP_
#define CFRISK__REMOTE_HPP_

#include <optional>
#include <string>

namespace cfrisk
{

/// Wire contract: HTTP POST of {"sample_id": ..., "prompt": ...}; success
/// is status 200 with body {"sample_id": ..., "text": ...}.
struct EndpointDescriptor
{
  std::string url;            // e.g. "http://127.0.0.1:8080/respond"
  double timeout_s{120.0};
  int retries{1};
};

enum class RemoteErrorKind { transport, timeout, http_status, bad_payload };

const char * to_string(RemoteErrorKind k);

struct RemoteError
{
  RemoteErrorKind kind{RemoteErrorKind::transport};
  std::string detail;
};

struct RemoteResult
{
  std::optional<std::string> text;   // raw response text, unmodified
  std::optional<RemoteError> error;

  bool ok() const { return text.has_value(); }
};

/// One request/response over the wire contract, with the descriptor's
/// timeout and retry policy. Failures are returned, never thrown.
RemoteResult query_remote_model(
  const std::string & sample_id, const std::string & prompt, const EndpointDescriptor & endpoint);

}  // namespace cfrisk

#endif  // CFRISK__REMOTE_HPP_
