#pragma once

#include "floweval/backends.hpp"
#include "floweval/oracle.hpp"

#include <filesystem>
#include <string>

namespace floweval::backends {

/// One backend choice from a config file section: either the deterministic
/// oracle (default, with optional seeded noise) or a generic HTTP adapter.
struct BackendSpec {
  std::string kind = "oracle";  // "oracle" | "http"
  BackendConfig config;
  OracleNoise noise;       // oracle only
  std::uint64_t seed = 0;  // oracle only; CLI --seed overrides

  bool is_oracle() const { return kind == "oracle"; }
};

struct BackendFileConfig {
  BackendSpec ocr;
  BackendSpec ve;
};

/// Parses the INI-style backend file:
///
///   [ocr]
///   kind = http
///   id = my-ocr
///   endpoint = http://127.0.0.1:8080/v1/vision
///   auth_env = MY_OCR_TOKEN
///   timeout_seconds = 30
///   max_retries = 2
///
///   [ve]
///   kind = oracle
///   fpr = 0.05
///   seed = 7
///
/// Unknown sections or keys are errors (they are always typos). Credentials
/// are never written in the file, only the NAME of the environment variable
/// that holds them. Throws std::invalid_argument with a line reference.
BackendFileConfig load_backend_config(const std::filesystem::path& path);

/// Built-in default: zero-noise oracle backends on both roles.
BackendFileConfig default_backend_config();

}  // namespace floweval::backends
