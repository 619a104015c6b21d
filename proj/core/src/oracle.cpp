#include "floweval/oracle.hpp"

#include "floweval/canonical.hpp"
#include "floweval/prompts.hpp"

#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace floweval::backends {

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t seed, std::string_view a, std::string_view b,
                  std::uint64_t occurrence) {
  std::uint64_t h = fnv1a(a);
  h = fnv1a(b, h ^ seed);
  h ^= occurrence * 0x9e3779b97f4a7c15ULL;
  return h;
}

/// One deterministic Bernoulli draw per (seed, keys) tuple.
bool chance(double p, std::uint64_t seed, std::string_view a, std::string_view b,
            std::uint64_t occurrence = 0) {
  if (p <= 0.0) return false;
  std::mt19937_64 rng(mix(seed, a, b, occurrence));
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::string format_noise(const char* kind, const OracleNoise& noise, std::uint64_t seed) {
  std::ostringstream id;
  id << "oracle-" << kind;
  if (noise.ve_fpr > 0 || noise.ve_fnr > 0 || noise.ocr_miss_rate > 0 || seed != 0) {
    id << "[fpr=" << noise.ve_fpr << ",fnr=" << noise.ve_fnr << ",miss=" << noise.ocr_miss_rate
       << ",seed=" << seed << "]";
  }
  return id.str();
}

class OracleOcrBackend final : public VisionBackend {
 public:
  OracleOcrBackend(std::shared_ptr<const OracleUniverse> universe, OracleNoise noise,
                   std::uint64_t seed)
      : universe_(std::move(universe)), noise_(noise), seed_(seed),
        id_(format_noise("ocr", noise, seed)) {}

  std::string id() const override { return id_; }

  std::string complete(const ImageRef& image, const std::string&) override {
    const ElementSet* gt = universe_ ? universe_->lookup(image.digest) : nullptr;
    if (!gt) return std::string(prompts::kNoTextSentinel);
    std::string out;
    std::unordered_map<std::string, std::uint64_t> seen;
    for (std::size_t i = 0; i < gt->text_pool_display.size(); ++i) {
      const std::string& canonical = gt->text_pool[i];
      std::uint64_t occurrence = seen[canonical]++;
      if (chance(noise_.ocr_miss_rate, seed_, image.digest, canonical, occurrence)) continue;
      if (!out.empty()) out.push_back('\n');
      out += gt->text_pool_display[i];
    }
    return out.empty() ? std::string(prompts::kNoTextSentinel) : out;
  }

 private:
  std::shared_ptr<const OracleUniverse> universe_;
  OracleNoise noise_;
  std::uint64_t seed_;
  std::string id_;
};

class OracleVeBackend final : public VisionBackend {
 public:
  OracleVeBackend(std::shared_ptr<const OracleUniverse> universe, OracleNoise noise,
                  std::uint64_t seed, double threshold)
      : universe_(std::move(universe)), noise_(noise), seed_(seed), threshold_(threshold),
        id_(format_noise("ve", noise, seed)) {}

  std::string id() const override { return id_; }

  std::string complete(const ImageRef& image, const std::string& prompt) override {
    const ElementSet* gt = universe_ ? universe_->lookup(image.digest) : nullptr;
    std::vector<std::pair<unsigned long, std::string>> hypotheses = extract_hypotheses(prompt);
    std::string out;
    for (const auto& [index, text] : hypotheses) {
      std::string canonical = canonicalize_label(text);
      bool present = gt && is_member(*gt, canonical);
      bool answer = present;
      if (present && chance(noise_.ve_fnr, seed_ ^ 0x5653ULL, image.digest, canonical))
        answer = false;
      if (!present && chance(noise_.ve_fpr, seed_ ^ 0x5650ULL, image.digest, canonical))
        answer = true;
      if (!out.empty()) out.push_back('\n');
      out += std::to_string(index);
      out += answer ? ". yes" : ". no";
    }
    return out;
  }

 private:
  bool is_member(const ElementSet& gt, const std::string& canonical) const {
    for (const Element& e : gt.elements)
      if (matching::similarity(canonical, e.canonical) >= threshold_) return true;
    return false;
  }

  /// Pulls the numbered hypothesis list back out of the rendered prompt.
  /// Deliberately parses the real wire format rather than taking a list
  /// in-process, so template rendering stays on the tested path.
  static std::vector<std::pair<unsigned long, std::string>> extract_hypotheses(
      const std::string& prompt) {
    static const std::string kBegin = "Elements to check:";
    static const std::string kEnd = "Please respond in this exact format:";
    std::size_t begin = prompt.find(kBegin);
    std::size_t end = prompt.find(kEnd);
    if (begin == std::string::npos || end == std::string::npos || end < begin)
      throw std::invalid_argument("oracle VE: prompt missing hypothesis section");
    std::istringstream section(prompt.substr(begin + kBegin.size(), end - begin - kBegin.size()));
    static const std::regex kItem(R"(^\s*(\d+)\.\s(.*)$)");
    std::vector<std::pair<unsigned long, std::string>> items;
    std::string line;
    while (std::getline(section, line)) {
      std::smatch m;
      if (std::regex_match(line, m, kItem)) items.emplace_back(std::stoul(m[1].str()), m[2].str());
    }
    if (items.empty()) throw std::invalid_argument("oracle VE: no numbered hypotheses found");
    return items;
  }

  std::shared_ptr<const OracleUniverse> universe_;
  OracleNoise noise_;
  std::uint64_t seed_;
  double threshold_;
  std::string id_;
};

}  // namespace

void OracleNoise::validate() const {
  auto in_range = [](double p) { return p >= 0.0 && p < 1.0; };
  if (!in_range(ve_fpr) || !in_range(ve_fnr) || !in_range(ocr_miss_rate))
    throw std::invalid_argument("oracle noise rates must be in [0, 1)");
}

void OracleUniverse::add(const ImageRef& image, ElementSet ground_truth) {
  charts_[image.digest] = std::move(ground_truth);
}

const ElementSet* OracleUniverse::lookup(const std::string& digest) const {
  auto it = charts_.find(digest);
  return it == charts_.end() ? nullptr : &it->second;
}

std::shared_ptr<VisionBackend> oracle_ocr_backend(std::shared_ptr<const OracleUniverse> universe,
                                                  OracleNoise noise, std::uint64_t seed) {
  noise.validate();
  return std::make_shared<OracleOcrBackend>(std::move(universe), noise, seed);
}

std::shared_ptr<VisionBackend> oracle_ve_backend(std::shared_ptr<const OracleUniverse> universe,
                                                 OracleNoise noise, std::uint64_t seed,
                                                 double threshold) {
  noise.validate();
  return std::make_shared<OracleVeBackend>(std::move(universe), noise, seed, threshold);
}

OracleBackends oracle_backends(const ImageRef& image, const ElementSet& ground_truth,
                               OracleNoise noise, std::uint64_t seed) {
  auto universe = std::make_shared<OracleUniverse>();
  universe->add(image, ground_truth);
  return {oracle_ocr_backend(universe, noise, seed), oracle_ve_backend(universe, noise, seed)};
}

}  // namespace floweval::backends
