#pragma once

#include "floweval/backends.hpp"
#include "floweval/element_set.hpp"
#include "floweval/image.hpp"
#include "floweval/matching.hpp"

#include <cstdint>
#include <memory>
#include <unordered_map>

namespace floweval::backends {

/// Seeded error model for the oracle backends. Rates are probabilities in
/// [0, 1); zero everywhere gives the exact ground-truth oracle.
struct OracleNoise {
  double ve_fpr = 0.0;       // absent element judged entailed
  double ve_fnr = 0.0;       // present element judged not entailed
  double ocr_miss_rate = 0.0;  // ground-truth text dropped from OCR output

  void validate() const;
};

/// Ground-truth registry shared by the oracle backends, keyed by image
/// digest. Register every chart of a corpus once, then hand the same
/// universe to both oracles.
class OracleUniverse {
 public:
  void add(const ImageRef& image, ElementSet ground_truth);
  const ElementSet* lookup(const std::string& digest) const;
  std::size_t size() const { return charts_.size(); }

 private:
  std::unordered_map<std::string, ElementSet> charts_;
};

/// OCR oracle: answers the extraction prompt with the chart's visible text
/// (node labels + edge labels), each line independently dropped with the
/// configured miss rate. Unknown digests get the no-text sentinel.
std::shared_ptr<VisionBackend> oracle_ocr_backend(std::shared_ptr<const OracleUniverse> universe,
                                                  OracleNoise noise = {},
                                                  std::uint64_t seed = 0);

/// VE oracle: parses the hypothesis list out of the real VE prompt, answers
/// yes iff the canonicalized hypothesis fuzzy-matches any ground-truth
/// element (similarity >= threshold), then applies seeded fpr/fnr flips.
/// Answers arrive in the wire format, so the full render/parse path is
/// exercised. Deterministic per (seed, digest, element).
std::shared_ptr<VisionBackend> oracle_ve_backend(std::shared_ptr<const OracleUniverse> universe,
                                                 OracleNoise noise = {}, std::uint64_t seed = 0,
                                                 double threshold = matching::kDefaultThreshold);

struct OracleBackends {
  std::shared_ptr<VisionBackend> ocr;
  std::shared_ptr<VisionBackend> ve;
};

/// Single-chart convenience: both oracles over a one-entry universe.
OracleBackends oracle_backends(const ImageRef& image, const ElementSet& ground_truth,
                               OracleNoise noise = {}, std::uint64_t seed = 0);

}  // namespace floweval::backends
