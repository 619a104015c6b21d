#include "floweval/backend_config.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace floweval::backends {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::filesystem::path& path, int line, const std::string& reason) {
  throw std::invalid_argument(path.string() + ":" + std::to_string(line) + ": " + reason);
}

double parse_double(const std::filesystem::path& path, int line, const std::string& value) {
  try {
    std::size_t used = 0;
    double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    fail(path, line, "expected a number, got '" + value + "'");
  }
}

long long parse_int(const std::filesystem::path& path, int line, const std::string& value) {
  try {
    std::size_t used = 0;
    long long out = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    fail(path, line, "expected an integer, got '" + value + "'");
  }
}

void apply_key(const std::filesystem::path& path, int line, BackendSpec& spec,
               const std::string& key, const std::string& value) {
  if (key == "kind") {
    if (value != "oracle" && value != "http")
      fail(path, line, "kind must be 'oracle' or 'http', got '" + value + "'");
    spec.kind = value;
  } else if (key == "id") {
    spec.config.id = value;
  } else if (key == "endpoint") {
    spec.config.endpoint = value;
  } else if (key == "auth_env") {
    if (value.find("://") != std::string::npos || value.find(' ') != std::string::npos)
      fail(path, line, "auth_env must be the NAME of an environment variable");
    spec.config.auth_env = value;
  } else if (key == "timeout_seconds") {
    spec.config.timeout_seconds = parse_double(path, line, value);
  } else if (key == "max_retries") {
    spec.config.max_retries = static_cast<int>(parse_int(path, line, value));
  } else if (key == "max_batch") {
    spec.config.max_batch = static_cast<int>(parse_int(path, line, value));
  } else if (key == "parallelism") {
    spec.config.parallelism = static_cast<int>(parse_int(path, line, value));
  } else if (key == "fpr") {
    spec.noise.ve_fpr = parse_double(path, line, value);
  } else if (key == "fnr") {
    spec.noise.ve_fnr = parse_double(path, line, value);
  } else if (key == "miss_rate") {
    spec.noise.ocr_miss_rate = parse_double(path, line, value);
  } else if (key == "seed") {
    spec.seed = static_cast<std::uint64_t>(parse_int(path, line, value));
  } else {
    fail(path, line, "unknown key '" + key + "'");
  }
}

void finish(const std::filesystem::path& path, BackendSpec& spec, const char* role) {
  if (spec.config.id == "default") spec.config.id = role;
  if (spec.is_oracle()) {
    spec.noise.validate();
  } else if (spec.config.endpoint.empty()) {
    throw std::invalid_argument(path.string() + ": [" + role + "] http backend needs endpoint");
  }
  spec.config.validate();
}

}  // namespace

BackendFileConfig load_backend_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read backend config: " + path.string());

  BackendFileConfig config;
  BackendSpec* current = nullptr;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(path, line_no, "unterminated section header");
      std::string section = trim(line.substr(1, line.size() - 2));
      if (section == "ocr")
        current = &config.ocr;
      else if (section == "ve")
        current = &config.ve;
      else
        fail(path, line_no, "unknown section [" + section + "]; expected [ocr] or [ve]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(path, line_no, "expected 'key = value'");
    if (!current) fail(path, line_no, "key outside of [ocr]/[ve] section");
    apply_key(path, line_no, *current, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  finish(path, config.ocr, "ocr");
  finish(path, config.ve, "ve");
  return config;
}

BackendFileConfig default_backend_config() {
  BackendFileConfig config;
  config.ocr.config.id = "ocr";
  config.ve.config.id = "ve";
  return config;
}

}  // namespace floweval::backends
