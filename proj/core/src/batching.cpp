#include "floweval/backends.hpp"

#include <numeric>
#include <stdexcept>

namespace floweval::backends {

void BackendConfig::validate() const {
  if (max_batch < 3) throw std::invalid_argument("max_batch must be >= 3");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  if (timeout_seconds <= 0) throw std::invalid_argument("timeout_seconds must be > 0");
  if (id.empty()) throw std::invalid_argument("backend id must be non-empty");
}

BatchPlan plan_batches(std::size_t n_elements, int b0, std::size_t complexity_hint) {
  if (b0 < 3) throw std::invalid_argument("plan_batches: B0 must be >= 3");
  BatchPlan plan;
  if (n_elements == 0) return plan;

  std::vector<std::size_t> indices(n_elements);
  std::iota(indices.begin(), indices.end(), std::size_t{0});

  if (n_elements < 3) {
    plan.batches.push_back(std::move(indices));
    return plan;
  }

  // Complex charts get a tighter cap so the verifier sees fewer hypotheses
  // per call.
  std::size_t cap = static_cast<std::size_t>(b0);
  if (complexity_hint > 50)
    cap = std::max<std::size_t>(3, (static_cast<std::size_t>(b0) + 1) / 2);

  std::size_t k = (n_elements + cap - 1) / cap;
  // ceil(n / B) batches can leave a remainder batch of 1 or 2 after
  // balancing; fold down to the largest batch count that keeps every batch
  // at the 3-element floor.
  if (n_elements / k < 3) k = std::max<std::size_t>(1, n_elements / 3);

  std::size_t base = n_elements / k;
  std::size_t extra = n_elements % k;  // first `extra` batches get base + 1
  std::size_t next = 0;
  for (std::size_t b = 0; b < k; ++b) {
    std::size_t size = base + (b < extra ? 1 : 0);
    plan.batches.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(next),
                              indices.begin() + static_cast<std::ptrdiff_t>(next + size));
    next += size;
  }
  return plan;
}

}  // namespace floweval::backends
