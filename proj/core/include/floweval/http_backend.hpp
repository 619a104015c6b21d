#pragma once

#include "floweval/backends.hpp"

#include <memory>

namespace floweval::backends {

/// Generic chat-style HTTP adapter for the vision-inference wire operation.
/// POSTs JSON {"prompt": ..., "image": <base64>, "digest": ...} to the
/// configured endpoint and expects {"text": ...} back. When config.auth_env
/// names an environment variable, its value is sent as a bearer token; the
/// variable being unset is a configuration error.
std::shared_ptr<VisionBackend> http_vision_backend(const BackendConfig& config);

std::string base64_encode(std::string_view data);

}  // namespace floweval::backends
