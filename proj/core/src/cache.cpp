#include "floweval/cache.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <utility>

namespace floweval::backends {

namespace {

using nlohmann::json;

constexpr char kKeySep = '\x1f';

std::string verdict_key(const std::string& digest, const std::string& element) {
  return digest + kKeySep + element;
}

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void append_line(const std::filesystem::path& file, const std::string& line) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::app);
  out << line << '\n';
}

}  // namespace

std::string sanitize_backend_id(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '.' || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "backend" : out;
}

VerdictCache::VerdictCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path VerdictCache::dir_for(const std::string& backend_id) const {
  return root_ / sanitize_backend_id(backend_id);
}

VerdictCache::Shard& VerdictCache::shard_for(const std::string& backend_id) {
  Shard& shard = shards_[backend_id];
  if (!shard.loaded) {
    load(backend_id, shard);
    shard.loaded = true;
  }
  return shard;
}

void VerdictCache::load(const std::string& backend_id, Shard& shard) {
  auto read_jsonl = [&](const std::filesystem::path& file, auto&& consume) {
    std::ifstream in(file);
    if (!in) return;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !consume(record)) {
        warnings_.push_back("cache: skipped corrupt record " + file.string() + ":" +
                            std::to_string(line_no));
      }
    }
  };
  read_jsonl(dir_for(backend_id) / "verdicts.jsonl", [&](const json& r) {
    if (!r.contains("digest") || !r.contains("element") || !r.contains("entailed") ||
        !r["digest"].is_string() || !r["element"].is_string() || !r["entailed"].is_boolean())
      return false;
    CachedVerdict v;
    v.entailed = r["entailed"].get<bool>();
    v.defaulted = r.value("defaulted", false);
    // Later records win so a re-run can overwrite a defaulted verdict.
    shard.verdicts[verdict_key(r["digest"], r["element"])] = v;
    return true;
  });
  read_jsonl(dir_for(backend_id) / "ocr.jsonl", [&](const json& r) {
    if (!r.contains("digest") || !r.contains("response") || !r["digest"].is_string() ||
        !r["response"].is_string())
      return false;
    shard.ocr[r["digest"].get<std::string>()] = r["response"].get<std::string>();
    return true;
  });
}

std::optional<VerdictCache::CachedVerdict> VerdictCache::get_verdict(
    const std::string& backend_id, const std::string& digest, const std::string& element) {
  std::lock_guard lock(mutex_);
  Shard& shard = shard_for(backend_id);
  auto it = shard.verdicts.find(verdict_key(digest, element));
  if (it == shard.verdicts.end()) return std::nullopt;
  return it->second;
}

void VerdictCache::put_verdict(const std::string& backend_id, const std::string& digest,
                               const std::string& element, bool entailed, bool defaulted) {
  std::lock_guard lock(mutex_);
  Shard& shard = shard_for(backend_id);
  shard.verdicts[verdict_key(digest, element)] = {entailed, defaulted};
  json record{{"digest", digest},
              {"element", element},
              {"entailed", entailed},
              {"defaulted", defaulted},
              {"timestamp", now_seconds()}};
  append_line(dir_for(backend_id) / "verdicts.jsonl", record.dump());
}

std::optional<std::string> VerdictCache::get_ocr(const std::string& backend_id,
                                                 const std::string& digest) {
  std::lock_guard lock(mutex_);
  Shard& shard = shard_for(backend_id);
  auto it = shard.ocr.find(digest);
  if (it == shard.ocr.end()) return std::nullopt;
  return it->second;
}

void VerdictCache::put_ocr(const std::string& backend_id, const std::string& digest,
                           const std::string& response) {
  std::lock_guard lock(mutex_);
  Shard& shard = shard_for(backend_id);
  shard.ocr[digest] = response;
  json record{{"digest", digest}, {"response", response}, {"timestamp", now_seconds()}};
  append_line(dir_for(backend_id) / "ocr.jsonl", record.dump());
}

std::vector<std::string> VerdictCache::drain_warnings() {
  std::lock_guard lock(mutex_);
  return std::exchange(warnings_, {});
}

}  // namespace floweval::backends
