#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace floweval::backends {

/// Persistent response cache, one directory per backend id. Entailment
/// verdicts are keyed by (image digest, canonical element); OCR responses by
/// digest alone. Records append as JSON lines, so concurrent runs only ever
/// add; corrupt lines are skipped with a warning and never poison a run.
class VerdictCache {
 public:
  explicit VerdictCache(std::filesystem::path root);

  struct CachedVerdict {
    bool entailed = false;
    bool defaulted = false;
  };

  std::optional<CachedVerdict> get_verdict(const std::string& backend_id,
                                           const std::string& digest,
                                           const std::string& element);
  void put_verdict(const std::string& backend_id, const std::string& digest,
                   const std::string& element, bool entailed, bool defaulted);

  std::optional<std::string> get_ocr(const std::string& backend_id, const std::string& digest);
  void put_ocr(const std::string& backend_id, const std::string& digest,
               const std::string& response);

  const std::filesystem::path& root() const { return root_; }

  /// Corrupt-record notices collected while loading.
  std::vector<std::string> drain_warnings();

 private:
  struct Shard {
    bool loaded = false;
    std::unordered_map<std::string, CachedVerdict> verdicts;  // digest \x1f element
    std::unordered_map<std::string, std::string> ocr;         // digest -> response
  };

  Shard& shard_for(const std::string& backend_id);
  void load(const std::string& backend_id, Shard& shard);
  std::filesystem::path dir_for(const std::string& backend_id) const;

  std::filesystem::path root_;
  std::mutex mutex_;
  std::unordered_map<std::string, Shard> shards_;
  std::vector<std::string> warnings_;
};

/// Filesystem-safe rendering of a backend id (noise parameters and all).
std::string sanitize_backend_id(const std::string& id);

}  // namespace floweval::backends
