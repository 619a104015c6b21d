#pragma once

#include "floweval/image.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace floweval::backends {

class BackendError : public std::runtime_error {
 public:
  enum class Kind {
    network,    // transport failure, nothing received
    protocol,   // HTTP error status or unusable payload
    exhausted,  // retries used up
  };

  BackendError(Kind kind, int attempts, const std::string& what)
      : std::runtime_error(what), kind_(kind), attempts_(attempts) {}

  Kind kind() const { return kind_; }
  int attempts() const { return attempts_; }

 private:
  Kind kind_;
  int attempts_;
};

struct BackendConfig {
  std::string id = "default";
  std::string endpoint;          // empty for in-process backends
  std::string auth_env;          // env var NAME holding the credential
  double timeout_seconds = 30.0;
  int max_retries = 2;           // extra attempts after the first call
  int max_batch = 10;            // B0, the uncontended batch cap
  int parallelism = 4;           // in-flight batch limit

  /// Throws std::invalid_argument on out-of-range values (B0 < 3 etc.).
  void validate() const;
};

/// The single abstract wire operation: one image plus one prompt in, raw
/// response text out. Everything else (templates, batching, parsing, retry,
/// caching) lives in the clients, so any vision service drops in here.
class VisionBackend {
 public:
  virtual ~VisionBackend() = default;

  virtual std::string id() const = 0;

  /// Throws BackendError on transport or protocol failure.
  virtual std::string complete(const ImageRef& image, const std::string& prompt) = 0;
};

struct BatchPlan {
  std::vector<std::vector<std::size_t>> batches;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& b : batches) n += b.size();
    return n;
  }
};

/// Splits n elements into balanced batches. Busier charts (hint > 50) halve
/// the cap so each call stays tractable for the verifier; batches never go
/// below 3 elements unless fewer than 3 exist in total.
BatchPlan plan_batches(std::size_t n_elements, int b0, std::size_t complexity_hint);

struct EntailmentVerdict {
  std::size_t element_index = 0;
  std::string rendered_element;
  bool entailed = false;
  std::string batch_id;
  std::optional<std::string> raw_line;
  bool defaulted = false;   // answer missing or malformed, forced to no
  bool from_cache = false;
};

/// One parsed batch response. `answers[i]` covers the i-th element of the
/// batch (0-based); unanswered slots stay empty for the caller to retry or
/// default.
struct ParsedBatchResponse {
  struct Answer {
    bool entailed = false;
    std::string raw_line;
  };
  std::vector<std::optional<Answer>> answers;
  std::vector<std::string> warnings;

  bool complete() const {
    for (const auto& a : answers)
      if (!a) return false;
    return true;
  }
};

/// Scans a raw VE response for lines of the form "<index>. yes|no" (also
/// "<index>) yes"), case-insensitive, ignoring surrounding prose. Indices
/// outside [1, batch_size] are dropped with a warning; on a duplicate index
/// the first answer wins.
ParsedBatchResponse parse_ve_response(const std::string& response, std::size_t batch_size);

struct OcrResult {
  std::vector<std::string> texts;          // canonical multiset, response order
  std::vector<std::string> texts_display;  // trimmed raw lines, same order
  bool from_cache = false;
  bool empty_response = false;             // sentinel or blank response
};

class VerdictCache;

/// OCR extraction with retries and whole-response caching.
class OcrClient {
 public:
  OcrClient(std::shared_ptr<VisionBackend> backend, BackendConfig config,
            VerdictCache* cache = nullptr);

  OcrResult extract(const ImageRef& image);

  const std::string& backend_id() const { return id_; }

 private:
  std::shared_ptr<VisionBackend> backend_;
  BackendConfig config_;
  VerdictCache* cache_;
  std::string id_;
};

/// Batched visual-entailment verification. Guarantees one verdict per input
/// element in input order, no matter how the backend misbehaves: unanswered
/// elements are retried, then defaulted to "no".
class VeClient {
 public:
  VeClient(std::shared_ptr<VisionBackend> backend, BackendConfig config,
           VerdictCache* cache = nullptr);

  std::vector<EntailmentVerdict> verify(const ImageRef& image,
                                        const std::vector<std::string>& rendered,
                                        std::size_t complexity_hint);

  const std::string& backend_id() const { return id_; }

 private:
  std::shared_ptr<VisionBackend> backend_;
  BackendConfig config_;
  VerdictCache* cache_;
  std::string id_;
};

}  // namespace floweval::backends
