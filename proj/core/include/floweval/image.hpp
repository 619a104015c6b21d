#pragma once

#include <string>
#include <string_view>

namespace floweval {

/// Content-addressed handle to the image under evaluation. Backends get the
/// bytes; caches key on the digest, which is stable for identical content.
struct ImageRef {
  std::string path;    // provenance only; empty for in-memory refs
  std::string bytes;   // raw content sent to backends
  std::string digest;  // sha-256 of bytes, lowercase hex

  bool operator==(const ImageRef&) const = default;
};

std::string sha256_hex(std::string_view data);

ImageRef image_from_bytes(std::string bytes, std::string name = {});

/// Reads the file eagerly so the digest is fixed at construction.
/// Throws std::system_error (ENOENT et al.) when unreadable.
ImageRef image_from_file(const std::string& path);

}  // namespace floweval
