#include "pcqa/split.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "pcqa/error.hpp"
#include "pcqa/rng.hpp"

namespace pcqa {

SplitPlan split_dataset(const DatasetManifest& manifest, uint64_t seed) {
  std::map<std::string, std::vector<size_t>> by_reference;
  for (size_t i = 0; i < manifest.entries.size(); ++i)
    by_reference[manifest.entries[i].reference_id].push_back(i);

  if (by_reference.size() < 3)
    throw Error(ErrorCode::TooFewReferences,
                "need >= 3 distinct reference_ids, found " +
                    std::to_string(by_reference.size()));

  std::vector<std::string> refs;
  refs.reserve(by_reference.size());
  for (const auto& [ref, _] : by_reference) refs.push_back(ref);
  std::sort(refs.begin(), refs.end());  // canonical order before shuffling
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(refs);

  SplitPlan plan;
  plan.seed = seed;
  double total = static_cast<double>(manifest.entries.size());
  double assigned[3] = {0.0, 0.0, 0.0};
  std::vector<size_t>* buckets[3] = {&plan.train, &plan.val, &plan.test};

  for (size_t r = 0; r < refs.size(); ++r) {
    const std::vector<size_t>& entries = by_reference[refs[r]];
    size_t remaining = refs.size() - r;
    size_t empty = 0;
    for (int b = 0; b < 3; ++b)
      if (buckets[b]->empty()) ++empty;

    int chosen;
    if (remaining <= empty) {
      // hand the stragglers to the empty buckets, train-val-test order
      chosen = 0;
      for (int b = 0; b < 3; ++b)
        if (buckets[b]->empty()) { chosen = b; break; }
    } else {
      chosen = 0;
      double best_deficit = plan.ratios[0] * total - assigned[0];
      for (int b = 1; b < 3; ++b) {
        double deficit = plan.ratios[b] * total - assigned[b];
        if (deficit > best_deficit) {
          best_deficit = deficit;
          chosen = b;
        }
      }
    }
    for (size_t idx : entries) buckets[chosen]->push_back(idx);
    assigned[chosen] += static_cast<double>(entries.size());
  }

  for (int b = 0; b < 3; ++b) std::sort(buckets[b]->begin(), buckets[b]->end());
  return plan;
}

}  // namespace pcqa
