#include "floweval/image.hpp"

#include <openssl/evp.h>

#include <array>
#include <cerrno>
#include <fstream>
#include <sstream>
#include <system_error>

namespace floweval {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int md_len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &md_len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(md_len) * 2, '0');
  for (unsigned int i = 0; i < md_len; ++i) {
    out[2 * i] = hex[md[i] >> 4];
    out[2 * i + 1] = hex[md[i] & 0x0f];
  }
  return out;
}

ImageRef image_from_bytes(std::string bytes, std::string name) {
  ImageRef ref;
  ref.path = std::move(name);
  ref.digest = sha256_hex(bytes);
  ref.bytes = std::move(bytes);
  return ref;
}

ImageRef image_from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::system_error(errno ? errno : ENOENT, std::generic_category(),
                            "cannot read image: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ImageRef ref = image_from_bytes(std::move(buffer).str(), path);
  return ref;
}

}  // namespace floweval
