#include "floweval/backends.hpp"

#include "floweval/cache.hpp"
#include "floweval/canonical.hpp"
#include "floweval/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <regex>
#include <sstream>

namespace floweval::backends {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string trim_copy(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Runs `call` up to 1 + retries times on transport failure. Returns the
/// first response received; rethrows as `exhausted` once the budget is gone.
template <typename Call>
std::string with_retries(Call&& call, int retries, int& attempts_used) {
  for (int attempt = 0;; ++attempt) {
    try {
      ++attempts_used;
      return call();
    } catch (const BackendError&) {
      if (attempt >= retries) throw;
    }
  }
}

}  // namespace

ParsedBatchResponse parse_ve_response(const std::string& response, std::size_t batch_size) {
  static const std::regex kAnswer(R"(^\s*(\d+)[.)]\s*(yes|no)\b)", std::regex::icase);
  ParsedBatchResponse parsed;
  parsed.answers.resize(batch_size);
  for (const std::string& line : split_lines(response)) {
    std::smatch m;
    if (!std::regex_search(line, m, kAnswer)) continue;
    unsigned long index = 0;
    try {
      index = std::stoul(m[1].str());
    } catch (const std::out_of_range&) {
      parsed.warnings.push_back("answer index out of range: " + trim_copy(line));
      continue;
    }
    if (index < 1 || index > batch_size) {
      parsed.warnings.push_back("answer index " + std::to_string(index) +
                                " outside batch of " + std::to_string(batch_size));
      continue;
    }
    auto& slot = parsed.answers[index - 1];
    if (slot) continue;  // first answer wins
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(m[2].str()[0])));
    slot = ParsedBatchResponse::Answer{c == 'y', trim_copy(line)};
  }
  return parsed;
}

OcrClient::OcrClient(std::shared_ptr<VisionBackend> backend, BackendConfig config,
                     VerdictCache* cache)
    : backend_(std::move(backend)), config_(std::move(config)), cache_(cache) {
  config_.validate();
  id_ = backend_ ? backend_->id() : config_.id;
}

OcrResult OcrClient::extract(const ImageRef& image) {
  OcrResult result;
  std::string response;
  if (cache_) {
    if (auto hit = cache_->get_ocr(id_, image.digest)) {
      response = *hit;
      result.from_cache = true;
    }
  }
  if (!result.from_cache) {
    if (!backend_)
      throw BackendError(BackendError::Kind::network, 0, "no OCR backend configured");
    int attempts = 0;
    try {
      response = with_retries(
          [&] { return backend_->complete(image, std::string(prompts::ocr_prompt())); },
          config_.max_retries, attempts);
    } catch (const BackendError& e) {
      throw BackendError(BackendError::Kind::exhausted, attempts,
                         "ocr backend '" + id_ + "' failed after " + std::to_string(attempts) +
                             " attempts: " + e.what());
    }
    if (cache_) cache_->put_ocr(id_, image.digest, response);
  }

  std::string canonical_response = canonicalize_label(response);
  if (canonical_response.empty() ||
      canonical_response == canonicalize_label(std::string(prompts::kNoTextSentinel))) {
    result.empty_response = true;
    return result;
  }
  for (const std::string& line : split_lines(response)) {
    std::string display = trim_copy(line);
    if (display.empty()) continue;
    std::string canonical = canonicalize_label(display);
    if (canonical.empty()) continue;
    result.texts.push_back(std::move(canonical));
    result.texts_display.push_back(std::move(display));
  }
  result.empty_response = result.texts.empty();
  return result;
}

VeClient::VeClient(std::shared_ptr<VisionBackend> backend, BackendConfig config,
                   VerdictCache* cache)
    : backend_(std::move(backend)), config_(std::move(config)), cache_(cache) {
  config_.validate();
  id_ = backend_ ? backend_->id() : config_.id;
}

std::vector<EntailmentVerdict> VeClient::verify(const ImageRef& image,
                                                const std::vector<std::string>& rendered,
                                                std::size_t complexity_hint) {
  std::vector<EntailmentVerdict> verdicts(rendered.size());
  std::vector<std::string> canonical(rendered.size());
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    verdicts[i].element_index = i;
    verdicts[i].rendered_element = rendered[i];
    canonical[i] = canonicalize_label(rendered[i]);
  }
  if (rendered.empty()) return verdicts;

  // Resolve from cache first; only the misses go to the wire.
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    if (cache_) {
      if (auto hit = cache_->get_verdict(id_, image.digest, canonical[i])) {
        verdicts[i].entailed = hit->entailed;
        verdicts[i].defaulted = hit->defaulted;
        verdicts[i].from_cache = true;
        verdicts[i].batch_id = "cache";
        continue;
      }
    }
    misses.push_back(i);
  }
  if (misses.empty()) return verdicts;
  if (!backend_) throw BackendError(BackendError::Kind::network, 0, "no VE backend configured");

  BatchPlan plan = plan_batches(misses.size(), config_.max_batch, complexity_hint);
  std::string batch_prefix = image.digest.substr(0, 12);

  auto run_batch = [&](std::size_t batch_ordinal) {
    const std::vector<std::size_t>& batch = plan.batches[batch_ordinal];
    std::vector<std::string> batch_rendered;
    batch_rendered.reserve(batch.size());
    for (std::size_t slot : batch) batch_rendered.push_back(rendered[misses[slot]]);
    std::string prompt = prompts::render_ve_prompt(batch_rendered);
    std::string batch_id = batch_prefix + ":" + std::to_string(batch_ordinal);

    ParsedBatchResponse merged;
    merged.answers.resize(batch.size());
    int attempts = 0;
    bool any_response = false;
    // Transport retries and malformed-response retries share one budget;
    // later responses only fill slots earlier ones left unanswered.
    while (attempts <= config_.max_retries) {
      std::string response;
      try {
        ++attempts;
        response = backend_->complete(image, prompt);
      } catch (const BackendError& e) {
        if (attempts > config_.max_retries && !any_response)
          throw BackendError(BackendError::Kind::exhausted, attempts,
                             "ve backend '" + id_ + "' failed after " +
                                 std::to_string(attempts) + " attempts: " + e.what());
        continue;
      }
      any_response = true;
      ParsedBatchResponse parsed = parse_ve_response(response, batch.size());
      for (std::size_t s = 0; s < batch.size(); ++s)
        if (!merged.answers[s] && parsed.answers[s]) merged.answers[s] = parsed.answers[s];
      if (merged.complete()) break;
    }

    for (std::size_t s = 0; s < batch.size(); ++s) {
      EntailmentVerdict& v = verdicts[misses[batch[s]]];
      v.batch_id = batch_id;
      if (merged.answers[s]) {
        v.entailed = merged.answers[s]->entailed;
        v.raw_line = merged.answers[s]->raw_line;
        v.defaulted = false;
      } else {
        v.entailed = false;  // the template says: unseen means no
        v.defaulted = true;
      }
    }
  };

  // Bounded fan-out, deterministic join order.
  std::size_t window = std::max<std::size_t>(1, static_cast<std::size_t>(config_.parallelism));
  for (std::size_t begin = 0; begin < plan.batches.size(); begin += window) {
    std::size_t end = std::min(plan.batches.size(), begin + window);
    std::vector<std::future<void>> inflight;
    for (std::size_t b = begin + 1; b < end; ++b)
      inflight.push_back(std::async(std::launch::async, run_batch, b));
    run_batch(begin);
    for (auto& f : inflight) f.get();
  }

  if (cache_) {
    for (std::size_t i : misses)
      cache_->put_verdict(id_, image.digest, canonical[i], verdicts[i].entailed,
                          verdicts[i].defaulted);
  }
  return verdicts;
}

}  // namespace floweval::backends
