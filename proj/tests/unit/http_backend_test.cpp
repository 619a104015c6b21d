#include "httplib_config.hpp"

#include <floweval/http_backend.hpp>

#include <floweval/backends.hpp>
#include <floweval/image.hpp>

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

using namespace floweval;
using namespace floweval::backends;

namespace {

/// Loopback server that records the last request it saw.
class TestServer {
 public:
  TestServer() {
    server_.Post("/v1/vision", [this](const httplib::Request& req, httplib::Response& res) {
      remember(req);
      res.set_content("{\"text\": \"Start\\nEnd\"}", "application/json");
    });
    server_.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("upstream exploded", "text/plain");
    });
    server_.Post("/not-json", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("certainly not json", "text/plain");
    });
    server_.Post("/wrong-shape", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"answer\": 42}", "application/json");
    });
    server_.Post("/", [this](const httplib::Request& req, httplib::Response& res) {
      remember(req);
      res.set_content("{\"text\": \"root\"}", "application/json");
    });

    port_ = server_.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    while (!server_.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }

  ~TestServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

  nlohmann::json last_body() const {
    std::lock_guard lock(mutex_);
    return nlohmann::json::parse(last_body_);
  }

  std::string last_auth() const {
    std::lock_guard lock(mutex_);
    return last_auth_;
  }

  bool saw_auth_header() const {
    std::lock_guard lock(mutex_);
    return saw_auth_;
  }

 private:
  void remember(const httplib::Request& req) {
    std::lock_guard lock(mutex_);
    last_body_ = req.body;
    saw_auth_ = req.has_header("Authorization");
    last_auth_ = saw_auth_ ? req.get_header_value("Authorization") : "";
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::string last_body_;
  std::string last_auth_;
  bool saw_auth_ = false;
};

BackendConfig config_for(const std::string& endpoint) {
  BackendConfig config;
  config.id = "http-test";
  config.endpoint = endpoint;
  config.timeout_seconds = 5.0;
  return config;
}

}  // namespace

TEST_SUITE("http_backend") {
  TEST_CASE("posts the wire fields and returns the text payload") {
    TestServer server;
    ::setenv("FLOWEVAL_TEST_TOKEN", "sekrit-value", 1);
    BackendConfig config = config_for(server.url("/v1/vision"));
    config.auth_env = "FLOWEVAL_TEST_TOKEN";

    auto backend = http_vision_backend(config);
    CHECK(backend->id() == "http-test");

    ImageRef image = image_from_bytes("hello", "chart.png");
    CHECK(backend->complete(image, "read this chart") == "Start\nEnd");

    auto body = server.last_body();
    CHECK(body["prompt"] == "read this chart");
    CHECK(body["image"] == "aGVsbG8=");
    CHECK(body["digest"] == image.digest);
    CHECK(server.last_auth() == "Bearer sekrit-value");
    ::unsetenv("FLOWEVAL_TEST_TOKEN");
  }

  TEST_CASE("omits the authorization header when no variable is named") {
    TestServer server;
    auto backend = http_vision_backend(config_for(server.url("/v1/vision")));
    backend->complete(image_from_bytes("x"), "p");
    CHECK(!server.saw_auth_header());
  }

  TEST_CASE("an unset credential variable is a configuration error") {
    ::unsetenv("FLOWEVAL_DEFINITELY_UNSET");
    BackendConfig config = config_for("http://127.0.0.1:9/x");
    config.auth_env = "FLOWEVAL_DEFINITELY_UNSET";
    CHECK_THROWS_WITH_AS(
        http_vision_backend(config),
        doctest::Contains("credential environment variable 'FLOWEVAL_DEFINITELY_UNSET'"),
        std::invalid_argument);
  }

  TEST_CASE("http error statuses surface as protocol errors") {
    TestServer server;
    auto backend = http_vision_backend(config_for(server.url("/broken")));
    try {
      backend->complete(image_from_bytes("x"), "p");
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendError::Kind::protocol);
      CHECK(std::string(e.what()).find("HTTP 500") != std::string::npos);
    }

    auto missing = http_vision_backend(config_for(server.url("/no-such-route")));
    try {
      missing->complete(image_from_bytes("x"), "p");
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendError::Kind::protocol);
    }
  }

  TEST_CASE("unusable payloads surface as protocol errors") {
    TestServer server;
    for (const char* path : {"/not-json", "/wrong-shape"}) {
      auto backend = http_vision_backend(config_for(server.url(path)));
      try {
        backend->complete(image_from_bytes("x"), "p");
        FAIL("expected BackendError for " << path);
      } catch (const BackendError& e) {
        CHECK(e.kind() == BackendError::Kind::protocol);
        CHECK(std::string(e.what()).find("{\"text\": ...}") != std::string::npos);
      }
    }
  }

  TEST_CASE("transport failures surface as network errors") {
    BackendConfig config = config_for("http://127.0.0.1:9/x");  // discard port, nothing listens
    config.timeout_seconds = 0.5;
    auto backend = http_vision_backend(config);
    try {
      backend->complete(image_from_bytes("x"), "p");
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.kind() == BackendError::Kind::network);
      CHECK(e.attempts() == 1);
    }
  }

  TEST_CASE("a bare host endpoint posts to the root path") {
    TestServer server;
    auto backend = http_vision_backend(config_for(server.url("")));
    CHECK(backend->complete(image_from_bytes("y"), "p") == "root");
  }

  TEST_CASE("endpoints must carry a scheme") {
    CHECK_THROWS_WITH_AS(http_vision_backend(config_for("127.0.0.1:8080/x")),
                         doctest::Contains("endpoint must include a scheme"),
                         std::invalid_argument);
  }

  TEST_CASE("base64 encoding matches the reference vectors") {
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("fo") == "Zm8=");
    CHECK(base64_encode("foo") == "Zm9v");
    CHECK(base64_encode("foob") == "Zm9vYg==");
    CHECK(base64_encode("fooba") == "Zm9vYmE=");
    CHECK(base64_encode("foobar") == "Zm9vYmFy");
    CHECK(base64_encode(std::string_view("\x00\xff", 2)) == "AP8=");
  }
}
