// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/selector.hpp"

#include <chrono>
#include <cmath>

// httplib pulls in <resolv.h>, whose _res macro corrupts Eigen headers;
// keep it after everything that includes Eigen
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "thinkgrasp/errors.hpp"
#include "thinkgrasp/png_io.hpp"

namespace thinkgrasp {

namespace {

/// "http://host:port" or "host:port" -> (host, port). Path is fixed.
std::pair<std::string, int> split_endpoint(const std::string& endpoint) {
  std::string rest = endpoint;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
  while (!rest.empty() && rest.back() == '/') rest.pop_back();
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) return {rest, 80};
  return {rest.substr(0, colon), std::stoi(rest.substr(colon + 1))};
}

}  // namespace

std::optional<SelectorResponse> remote_select(const SelectorRequest& request,
                                              const std::string& endpoint,
                                              const RemotePolicy& policy) {
  if (endpoint.empty()) return std::nullopt;

  nlohmann::json body;
  body["image_png_b64"] =
      base64_encode(encode_png_rgb8(request.rgb, request.width, request.height));
  body["instruction"] = request.instruction;
  body["step"] = request.step_index;
  body["protocol"] = "thinkgrasp-v1";
  const std::string payload = body.dump();

  auto [host, port] = split_endpoint(endpoint);
  const auto timeout_sec = std::chrono::duration<double>(policy.timeout_s);

  for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
    httplib::Client client(host, port);
    client.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::milliseconds>(timeout_sec));
    client.set_read_timeout(
        std::chrono::duration_cast<std::chrono::milliseconds>(timeout_sec));
    client.set_write_timeout(
        std::chrono::duration_cast<std::chrono::milliseconds>(timeout_sec));

    auto res = client.Post("/v1/select", payload, "application/json");
    if (!res || res->status != 200) continue;  // network failure or timeout
    try {
      const auto parsed = nlohmann::json::parse(res->body);
      if (!parsed.contains("raw_text") || !parsed["raw_text"].is_string()) continue;
      return parse_response(parsed["raw_text"].get<std::string>());
    } catch (const ParseError&) {
      continue;
    } catch (const nlohmann::json::exception&) {
      continue;
    }
  }
  return std::nullopt;  // planner falls back to the scripted selector
}

}  // namespace thinkgrasp
