#include "floweval/http_backend.hpp"

#include "httplib_config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <stdexcept>

namespace floweval::backends {

namespace {

using nlohmann::json;

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // leading slash
};

Endpoint split_endpoint(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos)
    throw std::invalid_argument("endpoint must include a scheme: " + url);
  std::size_t path = url.find('/', scheme + 3);
  Endpoint out;
  if (path == std::string::npos) {
    out.base = url;
    out.path = "/";
  } else {
    out.base = url.substr(0, path);
    out.path = url.substr(path);
  }
  return out;
}

class HttpVisionBackend final : public VisionBackend {
 public:
  explicit HttpVisionBackend(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.endpoint.empty())
      throw std::invalid_argument("http backend needs an endpoint");
    endpoint_ = split_endpoint(config_.endpoint);
    if (!config_.auth_env.empty()) {
      const char* value = std::getenv(config_.auth_env.c_str());
      if (!value || !*value)
        throw std::invalid_argument("credential environment variable '" + config_.auth_env +
                                    "' is not set");
      token_ = value;
    }
  }

  std::string id() const override { return config_.id; }

  std::string complete(const ImageRef& image, const std::string& prompt) override {
    // One client per request keeps this safe under concurrent batches.
    httplib::Client client(endpoint_.base);
    auto timeout = std::chrono::milliseconds(
        static_cast<long long>(config_.timeout_seconds * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    json body{{"prompt", prompt}, {"image", base64_encode(image.bytes)}, {"digest", image.digest}};
    httplib::Result result = client.Post(endpoint_.path, headers, body.dump(), "application/json");
    if (!result)
      throw BackendError(BackendError::Kind::network, 1,
                         "backend '" + config_.id + "': " + httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300)
      throw BackendError(BackendError::Kind::protocol, 1,
                         "backend '" + config_.id + "': HTTP " + std::to_string(result->status));
    json payload = json::parse(result->body, nullptr, false);
    if (payload.is_discarded() || !payload.contains("text") || !payload["text"].is_string())
      throw BackendError(BackendError::Kind::protocol, 1,
                         "backend '" + config_.id + "': response is not {\"text\": ...}");
    return payload["text"].get<std::string>();
  }

 private:
  BackendConfig config_;
  Endpoint endpoint_;
  std::string token_;
};

}  // namespace

std::string base64_encode(std::string_view data) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8) |
                 static_cast<unsigned char>(data[i + 2]);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (i + 1 == data.size()) {
    unsigned v = static_cast<unsigned char>(data[i]) << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::shared_ptr<VisionBackend> http_vision_backend(const BackendConfig& config) {
  return std::make_shared<HttpVisionBackend>(config);
}

}  // namespace floweval::backends
